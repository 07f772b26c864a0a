#pragma once

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "nulllab/common.hpp"
#include "nulllab/quadrature.hpp"

namespace nulllab {

/// Cauchy data for a free wave. grad_w0 may be left empty; it is then taken by central differences.
struct KirchhoffData {
  std::function<double(const Vec3&)> w0;
  std::function<Vec3(const Vec3&)> grad_w0;
  std::function<double(const Vec3&)> w1;
  double support_radius = std::numeric_limits<double>::infinity();  // data vanish for |y| >= this
};

/// w(t,x) = t avg(w1 + <grad w0, omega>) + avg(w0) over the sphere |y - x| = t.
QuadResult kirchhoff(const KirchhoffData& d, double t, const Vec3& x, double tol = 1e-10);

/// rphi_l and d_t(rphi_l) at t = 0, as functions of r >= 0.
struct ModeData {
  Fn1 psi0;
  Fn1 psi1;
};

/// Source mode F_l(t, r) of -box phi = F.
using ModeSource = std::function<double(double t, double r)>;

struct ModeGridSpec {
  double delta = 0.05;  // spacing in u = t - r and v = t + r
  double t_max = 10.0;
  double r_max = 10.0;
  int ell = 0;
};

inline constexpr int kMaxEll = 8;

/// rphi_l on the null lattice u = a delta, v = b delta inside v <= v_max, t <= t_max.
class ModeGrid {
 public:
  double delta() const { return delta_; }
  int ell() const { return ell_; }
  double t_max() const { return 0.5 * n_cap_ * delta_; }
  double v_max() const { return b_max() * delta_; }
  int b_max() const { return static_cast<int>(rows_.size()) - 1; }
  bool valid(int a, int b) const;
  bool contains(double t, double r) const;

  /// Lattice value; a > b is read through the parity of rphi_l across r = 0.
  double node(int a, int b) const;
  double rphi(double t, double r) const;
  double phi(double t, double r) const;

 private:
  friend ModeGrid solve_mode(const ModeSource&, const ModeData&, const ModeGridSpec&);
  double delta_ = 0.0;
  int ell_ = 0;
  int n_cap_ = 0;
  std::vector<std::vector<double>> rows_;  // rows_[b][a + b]
};

/// Diamond-cell characteristic scheme for 4 d_u d_v psi = r F - l(l+1) psi / r^2, psi = 0 on r = 0.
ModeGrid solve_mode(const ModeSource& F, const ModeData& data, const ModeGridSpec& spec);

/// Solves at delta and delta/2 and returns the Richardson value of phi at each point.
/// Throws NumericalError when the estimated error exceeds rel_target * max(|phi|, floor) anywhere.
struct RefinedModeSolution {
  std::vector<double> phi;
  std::vector<double> error_estimate;
};
RefinedModeSolution solve_mode_refined(const ModeSource& F, const ModeData& data, const ModeGridSpec& spec,
                                       const std::vector<std::array<double, 2>>& points, double rel_target,
                                       double floor = 0.0);

/// int_0^R (psi_t^2 + psi_r^2 + l(l+1) psi^2 / r^2) dr on the cell centres at time level n + 1.
double mode_energy(const ModeGrid& g, int n);

enum class ExtrapolationFlag { Exact, Converged, NotConverging, Unreliable };
std::string extrapolation_name(ExtrapolationFlag f);

/// U(q, omega, r) = r u(r - q, r omega) at r0, 2 r0, 4 r0 and the Richardson limit U^inf.
struct RadiationField {
  std::vector<double> q;
  std::array<double, 3> radii{};
  std::vector<std::array<double, 3>> samples;
  std::vector<double> u_inf;
  std::vector<double> rate;  // gamma' in U = U^inf + c r^-gamma'
  std::vector<ExtrapolationFlag> flag;
};

RadiationField extract_radiation_field(const ScalarField& u, const Vec3& omega, const std::vector<double>& q,
                                       double r0 = 1e3, double rate_min = 0.05, double rate_max = 4.0);

/// box phi1 = 0, box phi2 = (d_t phi1)^2 with radial data for phi1 supported in r <= support.
struct ModelSystemSpec {
  ModeData phi1;
  double support = 2.0;
  double delta = 0.1;
  std::vector<double> q;
  double r_min = 1e2;
  double r_max = 1e4;
  int samples = 25;
};

/// r phi2 = alpha(q) ln r + beta(q) fitted along each cone.
struct ModelSystemReport {
  std::vector<double> q, alpha, beta, fit_residual;
};

ModelSystemReport run_model_system(const ModelSystemSpec& spec);

}  // namespace nulllab
