#include "nulllab/eikonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nulllab/coords.hpp"
#include "nulllab/cutoffs.hpp"
#include "nulllab/quadrature.hpp"

namespace nulllab {

namespace {

/// Forward-mode dual number carrying d/dt, d/dx1, d/dx2, d/dx3.
struct Dual {
  double v = 0.0;
  Vec4 d = Vec4::Zero();
};

Dual operator+(const Dual& a, const Dual& b) { return {a.v + b.v, a.d + b.d}; }
Dual operator-(const Dual& a, const Dual& b) { return {a.v - b.v, a.d - b.d}; }
Dual operator*(const Dual& a, const Dual& b) { return {a.v * b.v, a.d * b.v + b.d * a.v}; }
Dual operator/(const Dual& a, const Dual& b) { return {a.v / b.v, (a.d * b.v - b.d * a.v) / (b.v * b.v)}; }
Dual operator+(double c, const Dual& a) { return {a.v + c, a.d}; }
Dual operator*(double c, const Dual& a) { return {c * a.v, c * a.d}; }
Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
Dual sqrt(const Dual& a) {
  const double s = std::sqrt(a.v);
  return {s, a.d * (0.5 / s)};
}
Dual exp(const Dual& a) {
  const double e = std::exp(a.v);
  return {e, a.d * e};
}
Dual pow(const Dual& a, double p) {
  const double y = std::pow(a.v, p);
  return {y, a.d * (p * y / a.v)};
}

using DualVec4 = std::array<Dual, 4>;

enum class Family { Decay, Gaussian, Violating };

MetricSample synthetic_sample(Family fam, double eps, double gp, const Point4& X) {
  std::array<Dual, 4> c;
  for (int k = 0; k < 4; ++k) {
    c[k].v = X(k);
    c[k].d(k) = 1.0;
  }
  const Dual r = sqrt(c[1] * c[1] + c[2] * c[2] + c[3] * c[3]);
  if (!(r.v > 0.0)) throw DomainError("synthetic metric: undefined at r = 0");
  const DualVec4 om{Dual{}, c[1] / r, c[2] / r, c[3] / r};
  const Dual q = r - c[0];
  const Dual Y = 1.0 + 0.5 * om[3];
  const Dual D = 1.0 + c[0] + r;
  const Dual f = fam == Family::Gaussian ? exp(-0.25 * (q * q)) : pow(1.0 + q * q, -0.5 * gp);
  const Dual slow = eps * (Y * f / D);
  const Dual fast = eps * (Y * pow(D, -1.0 - gp));
  DualVec4 L, Lb, S;
  L[0] = Dual{1.0, Vec4::Zero()};
  Lb[0] = L[0];
  S[0] = Dual{};
  for (int i = 1; i < 4; ++i) {
    L[i] = om[i];
    Lb[i] = -om[i];
    S[i] = (i == 3 ? Dual{1.0, Vec4::Zero()} : Dual{}) - om[3] * om[i];
  }
  const Dual& on_l = fam == Family::Violating ? fast : slow;
  const Dual& on_lb = fam == Family::Violating ? slow : fast;
  MetricSample s;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const Dual h = on_l * (L[a] * L[b]) + 0.5 * (slow * (L[a] * S[b] + S[a] * L[b])) + on_lb * (Lb[a] * Lb[b]);
      s.h(a, b) = h.v;
      for (int k = 0; k < 4; ++k) s.dh[k](a, b) = h.d(k);
    }
  }
  return s;
}

Mat4 time_flip() {
  Mat4 p = Mat4::Identity();
  p(0, 0) = -1.0;
  return p;
}

Point4 flip_point(const Point4& X) { return Point4(-X(0), X(1), X(2), X(3)); }

/// Z^c and J^a_c = d_c Z^a for the commuting fields.
void z_coefficients(ZField z, const Point4& X, Vec4& Z, Mat4& J) {
  Z.setZero();
  J.setZero();
  int i = 0, j = 0;
  switch (z) {
    case ZField::Time:
      Z(0) = 1.0;
      return;
    case ZField::Rot12: i = 1; j = 2; break;
    case ZField::Rot13: i = 1; j = 3; break;
    case ZField::Rot23: i = 2; j = 3; break;
  }
  // Omega_ij = x^i d_j - x^j d_i
  Z(j) = X(i);
  Z(i) = -X(j);
  J(j, i) = 1.0;
  J(i, j) = -1.0;
}

/// (L_Z k)(w, w) = Z(k)(w, w) - 2 w_a (d_c Z^a) k^{cb} w_b.
double lie_contraction(const Mat4& k, const std::array<Mat4, 4>& dk, const Point4& X, const Vec4& w, ZField z) {
  Vec4 Z;
  Mat4 J;
  z_coefficients(z, X, Z, J);
  double zk = 0.0;
  for (int c = 0; c < 4; ++c) {
    if (Z(c) != 0.0) zk += Z(c) * w.dot(dk[c] * w);
  }
  return zk - 2.0 * w.dot(J * (k * w));
}

double null_denominator(const Mat4& g, const Vec4& w) {
  const double den = (g * w)(0);
  if (!(std::abs(den) >= 0.5)) throw SingularityError("eikonal: |g^{0b} w_b| below 0.5");
  return den;
}

using State = Eigen::Matrix<double, 7, 1>;  // x (3), w_0, m = x cross w (3)

struct Eval {
  Vec4 w;
  Vec4 F;
  Vec4 dw;
  State dy;
  Mat4 g;
};

/// Radial covector component from g(w, w) = 0 on the branch with w_r w_0 < 0.
double solve_radial(const Mat4& g, double w0, const Vec3& omega, const Vec3& tau) {
  const Vec4 e(0.0, omega.x(), omega.y(), omega.z());
  const Vec4 p(w0, tau.x(), tau.y(), tau.z());
  const double A = e.dot(g * e), B = 2.0 * e.dot(g * p), C = p.dot(g * p);
  const double disc = B * B - 4.0 * A * C;
  if (!(disc >= 0.0) || !(A > 0.0)) throw NumericalError("eikonal: no real null covector with the given tangential part");
  const double s = std::sqrt(disc);
  return w0 >= 0.0 ? (-B - s) / (2.0 * A) : (-B + s) / (2.0 * A);
}

Eval evaluate(const MetricProvider& m, double t, const State& y) {
  const Vec3 x = y.head<3>();
  const double r = x.norm();
  if (!(r > 0.0)) throw DomainError("eikonal: characteristic reached r = 0");
  const Vec3 om = x / r;
  const Vec3 mom = y.tail<3>();
  const Vec3 tau = mom.cross(x) / (r * r);
  const Point4 X(t, x.x(), x.y(), x.z());
  Eval ev;
  ev.g = m.inverse(X);
  const double wr = solve_radial(ev.g, y(3), om, tau);
  const Vec3 ws = wr * om + tau;
  ev.w = Vec4(y(3), ws.x(), ws.y(), ws.z());
  const double den = null_denominator(ev.g, ev.w);
  ev.F = ev.g * ev.w / den;
  const std::array<Mat4, 4> dg = m.derivative(X);
  for (int a = 0; a < 4; ++a) ev.dw(a) = -0.5 * ev.w.dot(dg[a] * ev.w) / den;
  auto H = [&](ZField z) { return -0.5 * lie_contraction(ev.g, dg, X, ev.w, z) / den; };
  ev.dy.head<3>() = ev.F.tail<3>();
  ev.dy(3) = H(ZField::Time);
  ev.dy(4) = H(ZField::Rot23);
  ev.dy(5) = -H(ZField::Rot13);
  ev.dy(6) = H(ZField::Rot12);
  return ev;
}

State rk4(const MetricProvider& m, double t, const State& y, double h) {
  const State k1 = evaluate(m, t, y).dy;
  const State k2 = evaluate(m, t + 0.5 * h, y + 0.5 * h * k1).dy;
  const State k3 = evaluate(m, t + 0.5 * h, y + 0.5 * h * k2).dy;
  const State k4 = evaluate(m, t + h, y + h * k3).dy;
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double reference_radius(double t, double qstar, double mass) { return rw_rho_inverse(t - qstar, mass); }

/// Derived quantities at (t, x) for covector w.
CharState describe(const MetricProvider& m, double t, const Vec3& x, const Vec4& w, double qstar, const Vec3& omega) {
  CharState s;
  s.t = t;
  s.x = x;
  s.w = w;
  const Point4 X(t, x.x(), x.y(), x.z());
  const Mat4 g = m.inverse(X);
  s.W = frame_components(star_frame(X, m.mass, omega), w);
  s.utilde = qstar - (t - rw_rho(x.norm(), m.mass));
  s.deviation = (x - reference_radius(t, qstar, m.mass) * omega).norm();
  s.residual = w.dot(g * w);
  return s;
}

CharState make_state(const MetricProvider& m, double t, const State& y, double qstar, const Vec3& omega) {
  const Eval ev = evaluate(m, t, y);
  CharState s = describe(m, t, y.head<3>(), ev.w, qstar, omega);
  s.F = ev.F;
  s.dw = ev.dw;
  return s;
}

}  // namespace

Mat4 MetricProvider::g0(const Point4& Xin) const {
  const Point4 X = reflected ? flip_point(Xin) : Xin;
  Mat4 g = minkowski();
  if (mass != 0.0) {
    const double r = X.tail<3>().norm();
    if (!(r > 0.0)) throw DomainError("metric: undefined at r = 0");
    const double c = mass / r * chi_tilde(r / (1.0 + std::abs(X(0))));
    g -= c * Mat4::Identity();
  }
  return g;  // g0 commutes with P
}

MetricSample MetricProvider::perturbation(const Point4& Xin) const {
  MetricSample s;
  s.h.setZero();
  for (auto& d : s.dh) d.setZero();
  if (!h1) return s;
  if (!reflected) return h1(Xin);
  const Mat4 P = time_flip();
  const MetricSample b = h1(flip_point(Xin));
  s.h = P * b.h * P;
  s.dh[0] = -(P * b.dh[0] * P);
  for (int k = 1; k < 4; ++k) s.dh[k] = P * b.dh[k] * P;
  return s;
}

Mat4 MetricProvider::inverse(const Point4& X) const { return g0(X) + perturbation(X).h; }

std::array<Mat4, 4> MetricProvider::derivative(const Point4& Xin) const {
  std::array<Mat4, 4> d = perturbation(Xin).dh;
  if (mass != 0.0) {
    const Point4 X = reflected ? flip_point(Xin) : Xin;
    const double r = X.tail<3>().norm();
    const double T = 1.0 + std::abs(X(0));
    const double s = r / T;
    const double ch = chi_tilde(s), cd = chi_tilde_d1(s);
    const double sgn = X(0) > 0.0 ? 1.0 : (X(0) < 0.0 ? -1.0 : 0.0);
    double dc_t = -mass * cd * sgn / (T * T);
    if (reflected) dc_t = -dc_t;
    const double radial = -mass * ch / (r * r) + mass / r * cd / T;
    d[0] -= dc_t * Mat4::Identity();
    for (int i = 1; i < 4; ++i) d[i] -= radial * X(i) / r * Mat4::Identity();
  }
  return d;
}

MetricProvider flat_metric() { return MetricProvider{}; }

MetricProvider schwarzschild_asymptotic(double mass) {
  if (!(mass >= 0.0)) throw DomainError("schwarzschild_asymptotic: mass must be nonnegative");
  MetricProvider m;
  m.mass = mass;
  m.name = "schwarzschild-asymptotic";
  return m;
}

MetricProvider synthetic_metric(const std::string& family, double mass, double epsilon, double gamma_prime) {
  Family fam;
  if (family == "decay") {
    fam = Family::Decay;
  } else if (family == "gaussian") {
    fam = Family::Gaussian;
  } else if (family == "violating") {
    fam = Family::Violating;
  } else {
    throw DomainError("synthetic_metric: unknown family '" + family + "'");
  }
  if (!(epsilon >= 0.0) || !(gamma_prime > 0.0 && gamma_prime < 1.0)) {
    throw DomainError("synthetic_metric: need epsilon >= 0 and 0 < gamma' < 1");
  }
  MetricProvider m = schwarzschild_asymptotic(mass);
  m.epsilon = epsilon;
  m.gamma_prime = gamma_prime;
  m.name = "synthetic:" + family;
  m.h1 = [fam, epsilon, gamma_prime](const Point4& X) { return synthetic_sample(fam, epsilon, gamma_prime, X); };
  return m;
}

MetricProvider make_metric(const std::string& spec, double mass, double epsilon, double gamma_prime) {
  if (spec == "flat") return flat_metric();
  if (spec == "schwarzschild-asymptotic") return schwarzschild_asymptotic(mass);
  const std::string prefix = "synthetic:";
  if (spec.rfind(prefix, 0) == 0) return synthetic_metric(spec.substr(prefix.size()), mass, epsilon, gamma_prime);
  throw DomainError("make_metric: unknown metric '" + spec + "'");
}

Vec4 f_vec(const Mat4& g_inv, const Vec4& w) {
  const double den = null_denominator(g_inv, w);
  Vec4 F = g_inv * w / den;
  F(0) = 1.0;
  return F;
}

std::string zfield_name(ZField z) {
  switch (z) {
    case ZField::Time: return "dt";
    case ZField::Rot12: return "Omega12";
    case ZField::Rot13: return "Omega13";
    case ZField::Rot23: return "Omega23";
  }
  return "?";
}

double h_z(const MetricProvider& m, const Point4& X, const Vec4& w, ZField z) {
  const double den = null_denominator(m.inverse(X), w);
  const MetricSample s = m.perturbation(X);
  return -0.5 * lie_contraction(s.h, s.dh, X, w, z) / den;
}

double h_z_full(const MetricProvider& m, const Point4& X, const Vec4& w, ZField z) {
  const Mat4 g = m.inverse(X);
  const double den = null_denominator(g, w);
  return -0.5 * lie_contraction(g, m.derivative(X), X, w, z) / den;
}

StarFrame star_frame(const Point4& X, double mass, const Vec3& seed) {
  const Vec3 x = X.tail<3>();
  const double r = x.norm();
  if (!(r > 0.0)) throw DomainError("star_frame: undefined at r = 0");
  const Vec3 om = x / r;
  const double rp = rw_rho_prime(r, mass);
  Vec3 e1, e2;
  orthonormal_complement(seed.normalized(), e1, e2);
  Vec3 s1 = e1 - e1.dot(om) * om;
  if (s1.norm() < 1e-8) s1 = e2 - e2.dot(om) * om;
  s1.normalize();
  const Vec3 s2 = om.cross(s1);
  StarFrame f;
  f.l = Vec4(1.0, om.x() / rp, om.y() / rp, om.z() / rp);
  f.lbar = Vec4(1.0, -om.x() / rp, -om.y() / rp, -om.z() / rp);
  f.s1 = Vec4(0.0, s1.x(), s1.y(), s1.z());
  f.s2 = Vec4(0.0, s2.x(), s2.y(), s2.z());
  return f;
}

Vec4 frame_components(const StarFrame& f, const Vec4& w) {
  return Vec4(f.lbar.dot(w), f.l.dot(w), f.s1.dot(w), f.s2.dot(w));
}

Vec4 covector_from_frame(const StarFrame& f, const Vec4& W) {
  // lbar and l share the time component 1 and have opposite spatial parts
  const Vec3 rad = f.l.tail<3>();
  const double w0 = 0.5 * (W(0) + W(1));
  const double wr = 0.5 * (W(1) - W(0)) / rad.squaredNorm();
  const Vec3 ws = wr * rad + W(2) * f.s1.tail<3>() + W(3) * f.s2.tail<3>();
  return Vec4(w0, ws.x(), ws.y(), ws.z());
}

Trajectory trace_characteristic(double T, double qstar, const Vec3& omega_in, const MetricProvider& m,
                                const TraceOptions& opt) {
  if (!(T > opt.t_min) || !(opt.t_min >= 0.0)) throw DomainError("trace_characteristic: need T > t_min >= 0");
  if (!(omega_in.norm() > 0.0)) throw DomainError("trace_characteristic: omega must be nonzero");
  if (!(opt.w_scale > 0.0) || !(opt.local_tol > 0.0) || !(opt.step_factor > 0.0) || !(opt.max_step > 0.0)) {
    throw DomainError("trace_characteristic: step options must be positive");
  }
  const Vec3 omega = omega_in.normalized();
  if (!(opt.t_min - qstar > 0.0)) throw DomainError("trace_characteristic: curve leaves r > 0 before t_min");
  const double r_end = reference_radius(opt.t_min, qstar, m.mass);
  if (!(r_end > 0.5 * opt.t_min)) throw DomainError("trace_characteristic: curve leaves r > t/2 before t_min");

  Trajectory tr;
  tr.T = T;
  tr.qstar = qstar;
  tr.omega = omega;

  const double rT = reference_radius(T, qstar, m.mass);
  const Vec3 x = rT * omega;
  const Vec3 ws = -opt.w_scale * rw_rho_prime(rT, m.mass) * omega;
  const Point4 X(T, x.x(), x.y(), x.z());
  const Mat4 g = m.inverse(X);
  const Vec4 sp(0.0, ws.x(), ws.y(), ws.z());
  const double a = g(0, 0), b = 2.0 * (g.row(0) * sp)(0), c = sp.dot(g * sp);
  const double disc = b * b - 4.0 * a * c;
  if (!(disc >= 0.0) || !(a < 0.0)) throw NumericalError("trace_characteristic: no null covector at t = T");
  State y;
  y.head<3>() = x;
  y(3) = (-b - std::sqrt(disc)) / (2.0 * a);
  y.tail<3>() = x.cross(ws);

  std::vector<double> cps;
  for (double cp : opt.checkpoints) {
    if (cp > opt.t_min && cp < T) cps.push_back(cp);
  }
  std::sort(cps.begin(), cps.end(), std::greater<double>());
  size_t next_cp = 0;

  double t = T;
  tr.states.push_back(make_state(m, t, y, qstar, omega));
  const double t_eps = 1e-13 * (1.0 + T);
  while (t > opt.t_min + t_eps) {
    while (next_cp < cps.size() && cps[next_cp] >= t - t_eps) ++next_cp;
    double target = std::max(t - std::min(opt.step_factor * (1.0 + t), opt.max_step), opt.t_min);
    if (next_cp < cps.size() && cps[next_cp] > target) target = cps[next_cp];
    bool accepted = false;
    for (int halving = 0; halving <= opt.max_halvings; ++halving) {
      const double h = target - t;
      const State y1 = rk4(m, t, y, h);
      const State y2 = rk4(m, t + 0.5 * h, rk4(m, t, y, 0.5 * h), 0.5 * h);
      const double err = (y1 - y2).cwiseAbs().maxCoeff();
      if (std::isfinite(err) && err <= opt.local_tol) {
        y = y2;
        t = target;
        accepted = true;
        break;
      }
      ++tr.rejected_steps;
      target = t + 0.5 * h;
    }
    if (!accepted) {
      tr.complete = false;
      tr.failure = "step size underflow at t = " + std::to_string(t);
      break;
    }
    tr.states.push_back(make_state(m, t, y, qstar, omega));
  }
  return tr;
}

CharState state_at(const Trajectory& tr, double t, const MetricProvider& m) {
  const auto& st = tr.states;
  if (st.empty()) throw DomainError("state_at: empty trajectory");
  const bool decreasing = st.size() < 2 || st.front().t > st.back().t;
  const double lo = decreasing ? st.back().t : st.front().t;
  const double hi = decreasing ? st.front().t : st.back().t;
  const double tol = 1e-12 * (1.0 + std::abs(hi));
  if (t < lo - tol || t > hi + tol) throw DomainError("state_at: time outside the trajectory");
  for (const auto& s : st) {
    if (std::abs(s.t - t) <= tol) return s;
  }
  size_t k = 0;
  while (k + 1 < st.size() && !((st[k].t - t) * (st[k + 1].t - t) <= 0.0)) ++k;
  const CharState& A = st[k];
  const CharState& B = st[k + 1];
  const double h = B.t - A.t;
  const double s = (t - A.t) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  const Vec3 x = h00 * A.x + h10 * h * A.F.tail<3>() + h01 * B.x + h11 * h * B.F.tail<3>();
  const Vec4 w = h00 * A.w + h10 * h * A.dw + h01 * B.w + h11 * h * B.dw;
  CharState out = describe(m, t, x, w, tr.qstar, tr.omega);
  out.F = (1 - s) * A.F + s * B.F;
  out.dw = (1 - s) * A.dw + s * B.dw;
  return out;
}

MetricProvider reflect_time(const MetricProvider& m) {
  MetricProvider r = m;
  r.reflected = !m.reflected;
  const std::string tag = ":reflected";
  if (r.name.size() > tag.size() && r.name.compare(r.name.size() - tag.size(), tag.size(), tag) == 0) {
    r.name.resize(r.name.size() - tag.size());
  } else {
    r.name += tag;
  }
  return r;
}

Trajectory trace_incoming(double T, double pstar, const Vec3& omega, const MetricProvider& m, const TraceOptions& opt) {
  const MetricProvider mr = reflect_time(m);
  const Trajectory ur = trace_characteristic(T, -pstar, omega, mr, opt);
  Trajectory tr;
  tr.T = T;
  tr.qstar = pstar;
  tr.omega = ur.omega;
  tr.rejected_steps = ur.rejected_steps;
  tr.complete = ur.complete;
  tr.failure = ur.failure;
  tr.states.reserve(ur.states.size());
  for (auto it = ur.states.begin(); it != ur.states.end(); ++it) {
    CharState s = *it;
    s.t = -it->t;
    s.w.tail<3>() = -it->w.tail<3>();
    s.F.tail<3>() = -it->F.tail<3>();
    s.dw(0) = -it->dw(0);
    const Point4 X(s.t, s.x.x(), s.x.y(), s.x.z());
    s.W = frame_components(star_frame(X, m.mass, tr.omega), s.w);
    s.utilde = -it->utilde;
    tr.states.push_back(s);
  }
  return tr;
}

double utilde_bound_ratio(const Trajectory& tr, const MetricProvider& m) {
  if (!tr.complete) throw NumericalError("utilde_bound_ratio: incomplete trajectory: " + tr.failure);
  if (!(m.epsilon > 0.0)) throw DomainError("utilde_bound_ratio: epsilon must be positive");
  double sup = 0.0;
  for (const auto& s : tr.states) {
    const double q = rw_rho(s.x.norm(), m.mass) - s.t;
    const double w = std::pow((1.0 + s.t + std::abs(q)) / (1.0 + neg_part(q)), m.gamma_prime);
    sup = std::max(sup, std::abs(s.utilde) * w / m.epsilon);
  }
  return sup;
}

double h_time_envelope_ratio(const Trajectory& tr, const MetricProvider& m) {
  if (!tr.complete) throw NumericalError("h_time_envelope_ratio: incomplete trajectory: " + tr.failure);
  if (!(m.epsilon > 0.0)) throw DomainError("h_time_envelope_ratio: epsilon must be positive");
  const double e = m.epsilon;
  double sup = 0.0;
  for (const auto& s : tr.states) {
    const Point4 X(s.t, s.x.x(), s.x.y(), s.x.z());
    const double q = rw_rho(s.x.norm(), m.mass) - s.t;
    const double env = e * std::pow(1.0 + pos_part(q), -m.gamma_prime) * std::pow(1.0 + s.t, e - 2.0) *
                       std::pow(1.0 + std::abs(q), -e);
    sup = std::max(sup, std::abs(h_z(m, X, s.w, ZField::Time)) / env);
  }
  return sup;
}

ConvergenceRow convergence_study(double T1, double T2, const std::vector<double>& qstars,
                                 const std::vector<Vec3>& omegas, const MetricProvider& m, const TraceOptions& opt) {
  if (!(T1 <= T2)) throw DomainError("convergence_study: need T1 <= T2");
  if (qstars.empty() || omegas.empty()) throw DomainError("convergence_study: empty label grid");
  TraceOptions o = opt;
  const int K = 40;
  const double t0 = std::max(opt.t_min, 1e-9);
  for (int k = 0; k <= K; ++k) o.checkpoints.push_back(t0 * std::pow(T1 / t0, double(k) / K));
  o.checkpoints.front() = opt.t_min;
  o.checkpoints.back() = T1;
  ConvergenceRow row;
  row.T1 = T1;
  row.T2 = T2;
  for (double q : qstars) {
    for (const Vec3& om : omegas) {
      const Trajectory a = trace_characteristic(T1, q, om, m, o);
      const Trajectory b = trace_characteristic(T2, q, om, m, o);
      if (!a.complete || !b.complete) throw NumericalError("convergence_study: " + a.failure + b.failure);
      for (double t : o.checkpoints) {
        const CharState s1 = state_at(a, t, m);
        const CharState s2 = state_at(b, t, m);
        row.dX = std::max(row.dX, (s2.x - s1.x).norm());
        row.dW = std::max(row.dW, (1.0 + std::abs(q)) * (s2.W - s1.W).norm());
        row.dWbar = std::max(row.dWbar, (1.0 + t + std::abs(q)) * (s2.W.tail<3>() - s1.W.tail<3>()).norm());
      }
    }
  }
  return row;
}

ConvergenceReport convergence_sweep(double T, int levels, const std::vector<double>& qstars,
                                    const std::vector<Vec3>& omegas, const MetricProvider& m, const TraceOptions& opt) {
  if (levels < 1) throw DomainError("convergence_sweep: need at least one level");
  ConvergenceReport rep;
  std::vector<double> lt, ld;
  bool all_zero = true;
  for (int k = 0; k < levels; ++k) {
    const double T1 = T * std::ldexp(1.0, k);
    rep.rows.push_back(convergence_study(T1, 2.0 * T1, qstars, omegas, m, opt));
    const auto& r = rep.rows.back();
    const double D = std::max({r.dX, r.dW, r.dWbar});
    if (D > 0.0) all_zero = false;
    lt.push_back(std::log(T1));
    ld.push_back(std::log(D));
  }
  for (size_t k = 0; k + 1 < ld.size(); ++k) rep.exponents.push_back((ld[k] - ld[k + 1]) / std::log(2.0));
  if (all_zero) {
    rep.fitted_exponent = std::numeric_limits<double>::infinity();
  } else if (lt.size() == 1) {
    rep.fitted_exponent = std::numeric_limits<double>::quiet_NaN();
  } else {
    double mt = 0.0, md = 0.0;
    for (size_t k = 0; k < lt.size(); ++k) {
      mt += lt[k];
      md += ld[k];
    }
    mt /= lt.size();
    md /= lt.size();
    double num = 0.0, den = 0.0;
    for (size_t k = 0; k < lt.size(); ++k) {
      num += (lt[k] - mt) * (ld[k] - md);
      den += (lt[k] - mt) * (lt[k] - mt);
    }
    rep.fitted_exponent = -num / den;
  }
  return rep;
}

}  // namespace nulllab
