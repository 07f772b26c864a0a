#pragma once

#include <functional>
#include <string>

#include "nulllab/common.hpp"
#include "nulllab/quadrature.hpp"

namespace nulllab {

/// Radiation profile n(q, omega) feeding F[n] = n(r-t, omega) r^-2 chi(<r-t>/(t+r)).
struct SourceProfile {
  std::function<double(double q, const Vec3& omega)> n;
  double a = 1.0;          // decay exponent in <q>^{-1-a}
  bool spherical = false;  // n independent of omega
  std::string name;
};

/// n = amp <q>^{-p}.
SourceProfile bracket_power_profile(double p, double amp = 1.0);
/// n = amp exp(-c q^2).
SourceProfile gaussian_profile(double c, double amp = 1.0);
/// n = <q>^{-p} (1 + beta omega_3), angular test profile.
SourceProfile tilted_profile(double p, double beta);

/// sup over a lattice of <q>^{1+a} sum_{k+|alpha|<=N} |(<q> d_q)^k Omega^alpha n|, N <= 2.
struct ProfileCheck {
  double constant = 0.0;
  double worst_q = 0.0;
};
ProfileCheck check_profile(const SourceProfile& n, int N = 2, double q_max = 200.0, int samples = 401);

/// rho = ((t+q)^2 - r^2) / (2 (t+q-<x,omega>)), s = rho - q.
struct RetardedGeometry {
  double rho = 0.0;
  double s = 0.0;
  bool valid = false;  // t + q >= r, so the backward cone meets the source
};
RetardedGeometry retarded_geometry(double t, const Vec3& x, double q, const Vec3& omega);
/// 0 <= t+q-r <= 2 rho <= t+q+r and t-r <= rho+s <= t+r, with relative slack tol.
bool retarded_inequalities_hold(double t, const Vec3& x, double q, const Vec3& omega, RetardedGeometry* g = nullptr,
                                double tol = 1e-12);

double eval_source(const SourceProfile& n, double t, const Vec3& x);

/// Near-cone log kernel int_{r-t}^inf (1/2r) ln((t+r+q)/(t-r+q)) n dq chi(<r-t>/(t+r)).
QuadResult phi1(const SourceProfile& n, double t, double r, const Vec3& omega);
/// (1/2r) int_{r-t}^inf n dq chi(<r-t>/(t+r)).
QuadResult phi1_plus(const SourceProfile& n, double t, double r, const Vec3& omega);
/// Retarded solution of -box phi = F[n] with vanishing data.
QuadResult phi_exact(const SourceProfile& n, double t, const Vec3& x);
/// Interior representation with the cutoff chi(<q>/(t+r)) outside the sphere integral.
QuadResult phi2(const SourceProfile& n, double t, const Vec3& x);

/// S0(t, r) = (t/r) ln(<t+r>/<t-r>); r = 0 gives the limit 2t^2/(1+t^2).
double s0_envelope(double t, double r);

/// int_{r-t}^inf (ln|(t+r+q)/(t-r+q)| - ln(<t+r>/<t-r>)) m(q) dq.
QuadResult log_kernel_integral(const Fn1& m, double t, double r);
/// Bound shape for m = <q>^{-1-b}.
double log_kernel_envelope(double t, double r, double b);

/// 1 / ((1+t+r)(1+|r-t|)^a).
double phi2_remainder_envelope(double t, double r, double a);
/// (1+(t-r)_+)^a / (1+t+r)^{1+a}.
double flux_remainder_envelope(double t, double r, double a);
/// S0 / ((1+t+r)(1+q_+)^delta).
double cone_source_envelope(double t, double r, double delta);
/// 1 / ((1+r)(1+t+r)(1+|t-r|)^{1+delta}), radial.
double cone_source(double t, double r, double delta);

/// int_a^inf f, splitting off [a, a+1] with a log map and mapping the far tail by q = X e^y.
QuadResult integrate_to_infinity(const Fn1& f, double a, double tol = 1e-11, bool log_left = true);

}  // namespace nulllab
