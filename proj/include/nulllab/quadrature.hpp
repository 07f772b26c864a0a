#pragma once

#include <functional>
#include <vector>

#include "nulllab/common.hpp"

namespace nulllab {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

using Fn1 = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (7/15) on a finite or semi-infinite interval. Bisection stops once
/// the local estimate meets max(tol |I|, abs_tol). Throws NumericalError when the estimate
/// stays above tol * max(1, |I|) * 1e3.
QuadResult integrate(const Fn1& f, double a, double b, double tol = 1e-11,
                     unsigned max_depth = 18, double abs_tol = 0.0);

/// Double-exponential rule, robust against integrable endpoint singularities.
QuadResult integrate_endpoint_singular(const Fn1& f, double a, double b,
                                       double tol = 1e-11);

/// Integral over [a, inf) of a function with a log singularity at a.
/// Uses q = a + e^y on (a, a+1] and Gauss-Kronrod on the remainder.
QuadResult integrate_log_left(const Fn1& f, double a, double upper, double tol = 1e-11, double abs_tol = 0.0);

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};
const GaussRule& gauss_legendre(int n);

/// Product rule on the unit sphere for the normalised measure dS/4pi:
/// Gauss-Legendre in cos(theta) times the trapezoid rule in azimuth.
struct SphereRule {
  std::vector<Vec3> nodes;
  std::vector<double> weights;  // sum to 1
};
SphereRule sphere_rule(int n_theta, int n_phi);

/// Unit vectors completing e to a right-handed orthonormal triple.
void orthonormal_complement(const Vec3& e, Vec3& a, Vec3& b);

}  // namespace nulllab
