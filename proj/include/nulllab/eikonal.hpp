#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "nulllab/common.hpp"

namespace nulllab {

/// Spacetime point (t, x1, x2, x3).
using Point4 = Vec4;

/// Inverse-metric perturbation h1^{ab} and its partial derivatives d_c h1^{ab}.
struct MetricSample {
  Mat4 h;
  std::array<Mat4, 4> dh;
};

using PerturbationFamily = std::function<MetricSample(const Point4& X)>;

/// g^{ab} = g0^{ab} + h1^{ab} with g0^{ab} = m^{ab} - (M/r) delta^{ab} chi~(r/(1+|t|)).
struct MetricProvider {
  double mass = 0.0;
  double epsilon = 0.01;
  double gamma_prime = 0.4;
  PerturbationFamily h1;  // empty means h1 = 0
  std::string name = "flat";
  bool reflected = false;  // evaluate P g(-t, x) P, P = diag(-1, 1, 1, 1)

  Mat4 g0(const Point4& X) const;
  Mat4 inverse(const Point4& X) const;
  /// d_c g^{ab} for c = 0..3.
  std::array<Mat4, 4> derivative(const Point4& X) const;
  MetricSample perturbation(const Point4& X) const;
};

MetricProvider flat_metric();
MetricProvider schwarzschild_asymptotic(double mass);

/// Synthetic h1 built from eps f(q) Y(omega) / (1 + t + r) placed on frame tensors.
///  decay:     f = <q>^-gamma', slow part on L^a L^b and L^(a S^b), h_{LL} falls like (1+t+r)^{-1-gamma'}
///  gaussian:  as decay with f = exp(-q^2 / 4)
///  violating: the slow part sits on Lbar^a Lbar^b, so h_{LL} falls only like (1+t+r)^-1
MetricProvider synthetic_metric(const std::string& family, double mass, double epsilon, double gamma_prime);

/// Parses flat, schwarzschild-asymptotic or synthetic:<family>.
MetricProvider make_metric(const std::string& spec, double mass, double epsilon, double gamma_prime);

/// F^a = g^{ab} w_b / g^{0b} w_b. Throws SingularityError when |g^{0b} w_b| < 0.5.
Vec4 f_vec(const Mat4& g_inv, const Vec4& w);

enum class ZField { Time, Rot12, Rot13, Rot23 };
std::string zfield_name(ZField z);

/// dW_Z/dt along the characteristic: -1/2 (L_Z h1)(w, w) / g^{0b} w_b, exact when L_Z g0 = 0.
double h_z(const MetricProvider& m, const Point4& X, const Vec4& w, ZField z);

/// Full Lie-derivative form -1/2 (L_Z g)(w, w) / g^{0b} w_b, used by the tracer.
double h_z_full(const MetricProvider& m, const Point4& X, const Vec4& w, ZField z);

/// Frame N* = {Lbar*, L*, S1, S2} at X with L* = d_t + d_{r*}; S_A are built from seed, a unit vector.
struct StarFrame {
  Vec4 lbar, l, s1, s2;
};
StarFrame star_frame(const Point4& X, double mass, const Vec3& seed);
Vec4 frame_components(const StarFrame& f, const Vec4& w);
Vec4 covector_from_frame(const StarFrame& f, const Vec4& W);

struct CharState {
  double t = 0.0;
  Vec3 x = Vec3::Zero();
  Vec4 w = Vec4::Zero();  // Cartesian covector d_a u
  Vec4 W = Vec4::Zero();  // (W_Lbar*, W_L*, W_S1, W_S2)
  double utilde = 0.0;    // q* - (t - r*(|x|))
  double deviation = 0.0;  // |X(t) - X0(t)|
  double residual = 0.0;  // g^{ab} w_a w_b
  Vec4 F = Vec4::Zero();   // dX/dt
  Vec4 dw = Vec4::Zero();  // dw/dt
};

struct TraceOptions {
  double t_min = 0.0;
  double step_factor = 0.01;
  double max_step = 0.5;
  double local_tol = 1e-9;
  double w_scale = 1.0;  // multiplies the covector at t = T
  int max_halvings = 30;
  std::vector<double> checkpoints;  // steps are clipped to land on these times
};

struct Trajectory {
  double T = 0.0;
  double qstar = 0.0;
  Vec3 omega = Vec3::UnitZ();
  std::vector<CharState> states;  // t decreasing from T
  int rejected_steps = 0;
  bool complete = true;
  std::string failure;  // set when step control gave up; states end at the last good step
};

/// Curve of F(g, du) through gamma0(T), gamma0: t = rho(r) + q*, integrated backward to t_min
/// by RK4 with step-doubling control. u = q* on the curve; W_L* follows from g(w, w) = 0.
Trajectory trace_characteristic(double T, double qstar, const Vec3& omega, const MetricProvider& m,
                                const TraceOptions& opt = {});

/// State on a trajectory at time t (cubic Hermite in t between stored steps).
CharState state_at(const Trajectory& tr, double t, const MetricProvider& m);

/// Time-reflected metric g^R(t, x) = P g(-t, x) P with P = diag(-1, 1, 1, 1).
MetricProvider reflect_time(const MetricProvider& m);

/// Incoming solution v ~ t + r* with v = p* on the curve, for t in [-T, -t_min]:
/// v(t, x) = -u^R(-t, x), where u^R is traced in the reflected metric with label -p*.
Trajectory trace_incoming(double T, double pstar, const Vec3& omega, const MetricProvider& m,
                          const TraceOptions& opt = {});

/// Envelope ratio |u~| (1 + t + |q|)^gamma' (1 + q_-)^-gamma' / eps with q = r* - t; sup over the trajectory.
double utilde_bound_ratio(const Trajectory& tr, const MetricProvider& m);

/// sup |H_{d_t}| / [eps (1 + q_+)^-gamma' (1 + t)^(eps - 2) (1 + |q|)^-eps] over the trajectory, q = r* - t.
double h_time_envelope_ratio(const Trajectory& tr, const MetricProvider& m);

struct ConvergenceRow {
  double T1 = 0.0, T2 = 0.0;
  double dX = 0.0;         // sup |X2 - X1|
  double dW = 0.0;         // sup (1 + |q*|) |W2 - W1|
  double dWbar = 0.0;      // sup (1 + t + |q*|) |Wbar2 - Wbar1|
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::vector<double> exponents;  // log2 of successive ratios of max(dX, dW, dWbar) under T -> 2T
  double fitted_exponent = 0.0;   // least-squares slope of -log max(dX, dW, dWbar) against log T1
};

/// Differences between solutions with data at T1 < T2 over a grid of labels, compared on [t_min, T1].
ConvergenceRow convergence_study(double T1, double T2, const std::vector<double>& qstars,
                                 const std::vector<Vec3>& omegas, const MetricProvider& m,
                                 const TraceOptions& opt = {});

/// Runs convergence_study for T, 2T, ..., 2^levels T and fits the decay exponents.
ConvergenceReport convergence_sweep(double T, int levels, const std::vector<double>& qstars,
                                    const std::vector<Vec3>& omegas, const MetricProvider& m,
                                    const TraceOptions& opt = {});

}  // namespace nulllab
