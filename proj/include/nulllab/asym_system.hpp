#pragma once

#include <functional>
#include <istream>
#include <string>
#include <vector>

#include "nulllab/common.hpp"

namespace nulllab {

/// One coefficient A_{I,alpha beta}^{JK} of a quadratic nonlinearity
/// sum A d^alpha phi_J d^beta phi_K; multi-index entries are 0..3 (0 = time).
struct QuadraticTerm {
  int I = 0, J = 0, K = 0;
  std::vector<int> alpha, beta;
  double value = 0.0;
};

struct QuadraticSpec {
  int components = 0;
  std::vector<QuadraticTerm> terms;
  void validate() const;
};

/// Lines "I J K alpha beta value"; alpha/beta are digit strings such as "0", "00", "13",
/// or "-" for the empty index. '#' starts a comment.
QuadraticSpec parse_quadratic_spec(std::istream& in);

/// Reduced coefficients A_{I,nm}^{JK}(omega) = sum_{|alpha|=n,|beta|=m} A omega^^alpha omega^^beta,
/// omega^ = (-1, omega).
struct AsymCoeffs {
  struct Entry {
    int I, J, K, n, m;
    double value;
  };
  int components = 0;
  Vec3 omega = Vec3::UnitZ();
  std::vector<Entry> entries;
  double get(int I, int J, int K, int n, int m) const;
  bool all_zero(double tol = 0.0) const;
};

AsymCoeffs build_asym_coeffs(const QuadraticSpec& spec, const Vec3& omega);

struct AsymGrid {
  double Q = 12.0;
  double dq = 1e-2;
  double s0 = 0.0;
  double s_max = 1.0;
  double ds = 1e-2;
  int save_every = 1;
  double overflow_factor = 1e6;
};

struct AsymSnapshot {
  double s = 0.0;
  std::vector<std::vector<double>> phi;  // [component][q]
  std::vector<std::vector<double>> psi;
};

struct AsymState {
  std::vector<double> q;
  std::vector<AsymSnapshot> history;
  bool overflow = false;
  double overflow_s = 0.0;
};

std::vector<double> q_grid(const AsymGrid& g);

/// RK4 in s for Psi_I = d_q Phi_I under 2 d_s Psi_I = sum A_{I,nm}^{JK} d_q^n Phi_J d_q^m Phi_K.
/// Phi is rebuilt from Psi by quadrature from q = +Q where it vanishes.
AsymState integrate_asym_system(const AsymCoeffs& c, const std::vector<std::vector<double>>& phi0,
                                const AsymGrid& g);

struct ModelClosedForm {
  std::vector<double> phi1, phi2, f2;
};

/// Phi1 = F1, Phi2 = s F2 + F3 with F2(q) = -int_q^inf (F1')^2 / 2.
ModelClosedForm model_system_closed_form(const std::function<double(double)>& f1_prime,
                                         const std::function<double(double)>& f1,
                                         const std::function<double(double)>& f3,
                                         const std::vector<double>& q, double s);

/// QuadraticSpec for phi_1 free, box phi_2 = (d_t phi_1)^2.
QuadraticSpec model_spec();

enum class GrowthKind { Null, Polynomial, Exponential, Blowup, Indeterminate };
std::string growth_name(GrowthKind k);

struct GrowthResult {
  GrowthKind kind = GrowthKind::Indeterminate;
  double degree = 0.0;
  double rate = 0.0;
  double blowup_s = 0.0;
  double r2_poly = 0.0;
  double r2_exp = 0.0;
};

/// Fits the deviation G(s) = sup |(Psi, d_q Psi)(s) - (Psi, d_q Psi)(s0)|.
GrowthResult classify_growth(const AsymCoeffs& c, const std::vector<std::vector<double>>& phi0,
                             const AsymGrid& g);

/// Asymptotic Einstein data at one direction: frame components (L, Lbar, S1, S2 order)
/// of H^inf(q*) and of its q*-derivative.
struct EinsteinData {
  std::function<Mat4(double)> h_inf;
  std::function<Mat4(double)> dh_inf;
};

struct EinsteinResult {
  std::vector<double> q, s;
  /// [s index][q index] frame components from the integrator and the closed form.
  std::vector<std::vector<Mat4>> integrated, closed;
  double max_difference = 0.0;
};

/// Checks H_LL = 2M, H_LA = 0, delta^{AB} H_AB = 2M on a q* lattice; throws ValidationError.
void check_einstein_constraints(const EinsteinData& d, double M, double Q, double tol = 1e-10);

/// Integrates (2 d_s - 2M d_q) d_q H_U = 4 P_S(d_q H, d_q H) delta_{U, Lbar Lbar}
/// and evaluates the characteristic closed form at the same nodes.
EinsteinResult einstein_asym(const EinsteinData& d, double M, double Q, double dq, double s_max,
                             double ds, int save_every = 10);

/// q(s) = q* - M s for the constant H_LL = 2M.
inline double characteristic_foot(double qstar, double s, double M) { return qstar - M * s; }

}  // namespace nulllab
