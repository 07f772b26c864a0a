#pragma once

#include <limits>
#include <string>
#include <vector>

#include "nulllab/common.hpp"

namespace nulllab {

/// r* = r + kappa(t, r).
///  LogR:         kappa = M chi~(r/(1+t)) ln r
///  LogOnePlusR:  kappa = M chi~(r/(1+t)) ln(1+r)
///  ReggeWheeler: r* = rho(r) with rho' = sqrt((1+M/r)/(1-M/r)), no cutoff
enum class RStarVariant { LogR, LogOnePlusR, ReggeWheeler };

RStarVariant parse_variant(const std::string& name);
std::string variant_name(RStarVariant v);

struct CoordParams {
  double mass = 1e-4;
  RStarVariant variant = RStarVariant::LogOnePlusR;
};

struct KappaTerms {
  double kappa = 0.0;
  double kappa_r = 0.0;
  double kappa_t = 0.0;
  double a = 1.0;  // 1 + kappa_r
  double b = 1.0;  // 1 + kappa / r
};

double rstar(double r, double t, const CoordParams& p);
KappaTerms kappa_terms(double r, double t, const CoordParams& p);
/// Inverse of r -> r*(r, t) at fixed t.
double rstar_inverse(double rs, double t, const CoordParams& p);

/// x* = r*(|x|, t) x / |x|.
Vec3 to_starred(const Vec3& x, double t, const CoordParams& p);
/// d x*^i / d x^j = delta_ij (1 + kappa/r) + omega_i omega_j (kappa_r - kappa/r).
Mat3 jacobian(const Vec3& x, double t, const CoordParams& p);
/// (1 + kappa/r)^2 (1 + kappa_r).
double jacobian_det(const Vec3& x, double t, const CoordParams& p);

/// Closed-form tortoise coordinate normalised so rho(r) - r - M ln r -> 0.
double rw_rho(double r, double M);
double rw_rho_prime(double r, double M);
double rw_rho_inverse(double rho, double M);

/// Scalar field on a region; stencils leaving it raise DomainError.
struct SampledField {
  ScalarField f;
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
  double r_min = 0.0;
  double r_max = std::numeric_limits<double>::infinity();
};

/// -(1 + chi0/r) d_t^2 phi + (1 - chi0/r) Laplacian phi, chi0 = M chi~(r/(1+t)).
/// Fourth-order central differences with step h.
double apply_box0(const SampledField& phi, double t, const Vec3& x, double mass, double h);
/// Flat wave operator -d_t^2 + Laplacian, here applied in starred coordinates.
double apply_boxstar(const SampledField& phi_star, double t, const Vec3& xs, double h);

/// N = 1 + M ln(1+r) / (1 + |q|).
double n_weight(double r, double q, double mass);

/// Commuting fields: d_mu, Omega_ij = x^i d_j - x^j d_i, B_i = t d_i + x^i d_t, S = t d_t + x.d.
enum class VFKind { Partial, Rotation, Boost, Scaling };
struct VectorFieldSpec {
  VFKind kind = VFKind::Partial;
  int i = 0;
  int j = 0;
  std::string name() const;
};

std::vector<VectorFieldSpec> vector_field_family();
Vec4 vf_coefficients(const VectorFieldSpec& z, double t, const Vec3& x);
/// Z phi from the coefficient form and fourth-order differences of phi.
double apply_vector_field(const VectorFieldSpec& z, const ScalarField& phi, double t,
                          const Vec3& x, double h);
/// Gradient (d_t, d_1, d_2, d_3) of phi by fourth-order differences.
Vec4 gradient4(const ScalarField& phi, double t, const Vec3& x, double h);

}  // namespace nulllab

namespace nulllab {

struct OperatorComparison {
  double box0 = 0.0;
  double boxstar = 0.0;
  double difference = 0.0;
  double envelope = 0.0;  // M ln(1+r) / (1+t+r)^2 * max_{|J|<=1} |d Z^J phi|
  double ratio = 0.0;
};

/// Applies both operators to one field given in starred coordinates,
/// phi(t, x) = phi*(t, x*(t, x)), and scales the difference by the envelope.
OperatorComparison compare_box_operators(const ScalarField& phi_star, double t, const Vec3& x,
                                         const CoordParams& p, double h);

}  // namespace nulllab
