#pragma once

#include <array>
#include <functional>
#include <limits>
#include <vector>

#include "nulllab/backscatter.hpp"
#include "nulllab/common.hpp"
#include "nulllab/quadrature.hpp"

namespace nulllab {

/// V^inf_{AB}(q*, omega) on a q-grid times a sphere rule, stored as (V11, V12, V22) in the frame S1, S2.
/// v_lt optionally holds (V_LL, V_LS1, V_LS2); empty means these vanish.
struct TangentialRadiationData {
  std::vector<double> q;  // increasing
  SphereRule sphere;
  std::vector<std::array<double, 3>> v;     // index iq * sphere.nodes.size() + is
  std::vector<std::array<double, 3>> v_lt;  // same layout, or empty
  size_t index(size_t iq, size_t is) const { return iq * sphere.nodes.size() + is; }
};

/// V11 = -V22 = v(q), V12 = 0 at every node.
TangentialRadiationData diagonal_radiation_data(const std::vector<double>& q, const SphereRule& sphere, const Fn1& v);

/// Uniform grid of n points on [lo, hi].
std::vector<double> uniform_grid(double lo, double hi, int n);

/// n on the grid of the radiation data.
struct GridSource {
  std::vector<double> q;
  SphereRule sphere;
  std::vector<double> n;
  double a = 1.0;  // fitted decay exponent in <q>^{-1-a}, capped at kMaxDecay
};

inline constexpr double kMaxDecay = 10.0;
inline constexpr double kConstraintTol = 1e-8;

/// n = 1/2 delta^{CD} delta^{C'D'} V_CC' V_DD' = (V11^2 + 2 V12^2 + V22^2) / 2.
/// Throws ValidationError naming the worst node when |V11 + V22| or |V_LT| exceeds kConstraintTol.
GridSource compute_n(const TangentialRadiationData& data);

/// sup |V| <q>(1 + q_+)^gamma' / eps over the grid.
double radiation_decay_constant(const TangentialRadiationData& data, double eps, double gamma_prime);

/// E(q*) = int n(q*, omega) dS / 8 pi, zero outside [q_min, q_max].
struct EnergyProfile {
  std::function<double(double)> E;
  double a = 1.0;
  double q_min = -std::numeric_limits<double>::infinity();
  double q_max = std::numeric_limits<double>::infinity();
  std::vector<double> nodes;  // grid nodes for piecewise data; empty for smooth profiles
};

/// Sphere average through a Gauss-Legendre product rule, or n / 2 for spherical profiles.
EnergyProfile energy_profile(const SourceProfile& n, int n_theta = 24, int n_phi = 48);
/// Cubic Lagrange interpolation in q of the rule-weighted grid values.
EnergyProfile energy_profile(const GridSource& n);

struct MassResult {
  double value = 0.0;
  double error = 0.0;       // quadrature error plus tail bound
  double tail_bound = 0.0;  // C int_{|q|>Q} <q>^{-1-a} dq
  double cutoff = 0.0;      // Q
  bool precision_warning = false;  // tail bound above 1e-8 of the total
};

/// M = int E(q*) dq*.
MassResult mass_from_flux(const EnergyProfile& e);
MassResult mass_from_flux(const SourceProfile& n);

/// K(a) = 2 - 2a + a^2 ln((2+a)/a) = int_0^2 w^2 / (a + w) dw. Throws DomainError for a <= 0.
double kll_kernel(double a);

/// int_{S^2} r* k_LL(t, r* omega) dS(omega)/4pi with t = r* - q*:
/// int_{q*}^inf K((rho - q*)/r*) E(rho) chi(<rho>/(t + r*)) drho.
QuadResult kll_average(const SourceProfile& n, double qstar, double rstar);

/// int (1 - <omega, sigma>)^2 n(rho, sigma) / (a + 1 - <omega, sigma>) dS(sigma)/4pi on a rule aligned with omega.
double kll_integrand_direct(const SourceProfile& n, double rho, double a, const Vec3& omega, int n_mu = 48,
                            int n_phi = 32);

/// r* k_LL(t, r* omega) from the unreduced double integral.
QuadResult kll_pointwise(const SourceProfile& n, double qstar, double rstar, const Vec3& omega);

/// |kll_average - 2M| at (q*, r*) against the admissible 2(|q*|/r* + (1+|q*|)^-gamma') M.
struct ClosureCheck {
  double mass = 0.0;
  double kll = 0.0;
  double discrepancy = 0.0;
  double bound = 0.0;
  bool pass = false;
};
ClosureCheck mass_closure(const SourceProfile& n, double qstar, double rstar, double gamma_prime);

}  // namespace nulllab
