#include "nulllab/asym_system.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "nulllab/null_frame.hpp"
#include "nulllab/quadrature.hpp"

namespace nulllab {

void QuadraticSpec::validate() const {
  if (components <= 0) throw ValidationError("quadratic spec: no components");
  for (const auto& t : terms) {
    for (int c : {t.I, t.J, t.K})
      if (c < 0 || c >= components) throw ValidationError("quadratic spec: component index out of range");
    if (t.alpha.size() > 2 || t.beta.size() > 2)
      throw ValidationError("quadratic spec: multi-index longer than 2");
    if (t.beta.empty()) throw ValidationError("quadratic spec: |beta| must be at least 1");
    for (int a : t.alpha)
      if (a < 0 || a > 3) throw ValidationError("quadratic spec: index outside 0..3");
    for (int b : t.beta)
      if (b < 0 || b > 3) throw ValidationError("quadratic spec: index outside 0..3");
    if (!std::isfinite(t.value)) throw ValidationError("quadratic spec: non-finite coefficient");
  }
}

namespace {

std::vector<int> parse_multi(const std::string& tok, int line) {
  std::vector<int> out;
  if (tok == "-") return out;
  for (char ch : tok) {
    if (ch < '0' || ch > '3')
      throw ValidationError("quadratic spec line " + std::to_string(line) + ": bad multi-index '" + tok + "'");
    out.push_back(ch - '0');
  }
  return out;
}

}  // namespace

QuadraticSpec parse_quadratic_spec(std::istream& in) {
  QuadraticSpec spec;
  std::string line;
  int lineno = 0;
  int max_index = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    QuadraticTerm t;
    std::string a, b;
    if (!(ls >> t.I)) continue;
    if (!(ls >> t.J >> t.K >> a >> b >> t.value))
      throw ValidationError("quadratic spec line " + std::to_string(lineno) + ": expected 'I J K alpha beta value'");
    std::string extra;
    if (ls >> extra) throw ValidationError("quadratic spec line " + std::to_string(lineno) + ": trailing tokens");
    t.alpha = parse_multi(a, lineno);
    t.beta = parse_multi(b, lineno);
    max_index = std::max({max_index, t.I, t.J, t.K});
    spec.terms.push_back(t);
  }
  spec.components = max_index + 1;
  spec.validate();
  return spec;
}

double AsymCoeffs::get(int I, int J, int K, int n, int m) const {
  double v = 0.0;
  for (const auto& e : entries)
    if (e.I == I && e.J == J && e.K == K && e.n == n && e.m == m) v += e.value;
  return v;
}

bool AsymCoeffs::all_zero(double tol) const {
  for (const auto& e : entries)
    if (std::abs(e.value) > tol) return false;
  return true;
}

AsymCoeffs build_asym_coeffs(const QuadraticSpec& spec, const Vec3& omega) {
  spec.validate();
  AsymCoeffs c;
  c.components = spec.components;
  c.omega = omega;
  const double hat[4] = {-1.0, omega.x(), omega.y(), omega.z()};
  for (const auto& t : spec.terms) {
    double v = t.value;
    for (int a : t.alpha) v *= hat[a];
    for (int b : t.beta) v *= hat[b];
    const int n = static_cast<int>(t.alpha.size());
    const int m = static_cast<int>(t.beta.size());
    bool merged = false;
    for (auto& e : c.entries) {
      if (e.I == t.I && e.J == t.J && e.K == t.K && e.n == n && e.m == m) {
        e.value += v;
        merged = true;
      }
    }
    if (!merged) c.entries.push_back({t.I, t.J, t.K, n, m, v});
  }
  return c;
}

std::vector<double> q_grid(const AsymGrid& g) {
  const int n = static_cast<int>(std::lround(2.0 * g.Q / g.dq));
  std::vector<double> q(n + 1);
  for (int i = 0; i <= n; ++i) q[i] = -g.Q + i * g.dq;
  return q;
}

namespace {

using Field = std::vector<double>;
using Fields = std::vector<Field>;

/// Second-order derivative: centred inside, one-sided at the ends.
Field d_q(const Field& f, double h) {
  const size_t n = f.size();
  Field d(n);
  for (size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2 * h);
  d[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h);
  d[n - 1] = (3 * f[n - 1] - 4 * f[n - 2] + f[n - 3]) / (2 * h);
  return d;
}

/// Fourth-order derivative for the initial data.
Field d_q4(const Field& f, double h) {
  Field d = d_q(f, h);
  const size_t n = f.size();
  for (size_t i = 2; i + 2 < n; ++i)
    d[i] = (-f[i + 2] + 8 * f[i + 1] - 8 * f[i - 1] + f[i - 2]) / (12 * h);
  return d;
}

/// Phi(q) = -int_q^Q Psi, trapezoid with the Euler-Maclaurin end correction.
Field rebuild_phi(const Field& psi, double h, double top = 0.0) {
  const size_t n = psi.size();
  const Field dpsi = d_q(psi, h);
  Field phi(n);
  double trap = 0.0;
  phi[n - 1] = top;
  for (size_t k = n - 1; k-- > 0;) {
    trap += 0.5 * h * (psi[k] + psi[k + 1]);
    phi[k] = top - trap + h * h / 12.0 * (dpsi[n - 1] - dpsi[k]);
  }
  return phi;
}

double sup_abs(const Fields& f) {
  double m = 0.0;
  for (const auto& c : f)
    for (double v : c) m = std::max(m, std::abs(v));
  return m;
}

struct Rhs {
  const AsymCoeffs& c;
  double h;
  bool need_phi = false, need_dpsi = false;

  Rhs(const AsymCoeffs& coeffs, double dq) : c(coeffs), h(dq) {
    for (const auto& e : c.entries) {
      if (e.n == 0 || e.m == 0) need_phi = true;
      if (e.n == 2 || e.m == 2) need_dpsi = true;
    }
  }

  Fields operator()(const Fields& psi) const {
    const size_t comps = psi.size();
    const size_t n = psi[0].size();
    Fields phi(comps), dpsi(comps);
    for (size_t j = 0; j < comps; ++j) {
      if (need_phi) phi[j] = rebuild_phi(psi[j], h);
      if (need_dpsi) dpsi[j] = d_q(psi[j], h);
    }
    auto pick = [&](int order, int j) -> const Field& {
      return order == 0 ? phi[j] : order == 1 ? psi[j] : dpsi[j];
    };
    Fields out(comps, Field(n, 0.0));
    for (const auto& e : c.entries) {
      if (e.value == 0.0) continue;
      const Field& a = pick(e.n, e.J);
      const Field& b = pick(e.m, e.K);
      for (size_t i = 0; i < n; ++i) out[e.I][i] += 0.5 * e.value * a[i] * b[i];
    }
    return out;
  }
};

Fields axpy(const Fields& y, double a, const Fields& x) {
  Fields out = y;
  for (size_t j = 0; j < y.size(); ++j)
    for (size_t i = 0; i < y[j].size(); ++i) out[j][i] += a * x[j][i];
  return out;
}

bool all_finite(const Fields& f) {
  for (const auto& c : f)
    for (double v : c)
      if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

AsymState integrate_asym_system(const AsymCoeffs& c, const std::vector<std::vector<double>>& phi0,
                                const AsymGrid& g) {
  if (static_cast<int>(phi0.size()) != c.components)
    throw ValidationError("integrate_asym_system: data has wrong number of components");
  AsymState st;
  st.q = q_grid(g);
  const size_t n = st.q.size();
  for (const auto& f : phi0) {
    if (f.size() != n) throw ValidationError("integrate_asym_system: data not on the q grid");
    if (std::abs(f.back()) > 1e-8) throw DomainError("integrate_asym_system: data does not decay at q = +Q");
  }
  Fields psi(phi0.size());
  for (size_t j = 0; j < phi0.size(); ++j) psi[j] = d_q4(phi0[j], g.dq);

  auto snapshot = [&](double s, const Fields& p) {
    AsymSnapshot snap;
    snap.s = s;
    snap.psi = p;
    snap.phi.resize(p.size());
    for (size_t j = 0; j < p.size(); ++j) snap.phi[j] = rebuild_phi(p[j], g.dq);
    st.history.push_back(std::move(snap));
  };

  const Rhs rhs(c, g.dq);
  const double base = std::max(sup_abs(psi), 1e-300);
  const int steps = static_cast<int>(std::ceil((g.s_max - g.s0) / g.ds - 1e-9));
  const double ds = steps > 0 ? (g.s_max - g.s0) / steps : 0.0;
  snapshot(g.s0, psi);
  for (int k = 1; k <= steps; ++k) {
    const Fields k1 = rhs(psi);
    const Fields k2 = rhs(axpy(psi, 0.5 * ds, k1));
    const Fields k3 = rhs(axpy(psi, 0.5 * ds, k2));
    const Fields k4 = rhs(axpy(psi, ds, k3));
    for (size_t j = 0; j < psi.size(); ++j)
      for (size_t i = 0; i < n; ++i)
        psi[j][i] += ds / 6.0 * (k1[j][i] + 2 * k2[j][i] + 2 * k3[j][i] + k4[j][i]);
    const double s = g.s0 + k * ds;
    if (!all_finite(psi) || sup_abs(psi) > g.overflow_factor * base) {
      st.overflow = true;
      st.overflow_s = s;
      break;
    }
    if (k % g.save_every == 0 || k == steps) snapshot(s, psi);
  }
  return st;
}

ModelClosedForm model_system_closed_form(const std::function<double(double)>& f1_prime,
                                         const std::function<double(double)>& f1,
                                         const std::function<double(double)>& f3,
                                         const std::vector<double>& q, double s) {
  using boost::math::quadrature::gauss;
  ModelClosedForm out;
  const size_t n = q.size();
  out.phi1.resize(n);
  out.phi2.resize(n);
  out.f2.resize(n);
  auto dens = [&](double x) {
    const double d = f1_prime(x);
    return 0.5 * d * d;
  };
  double acc = integrate(dens, q.back(), std::numeric_limits<double>::infinity(), 1e-14).value;
  for (size_t k = n; k-- > 0;) {
    if (k + 1 < n) acc += gauss<double, 10>::integrate(dens, q[k], q[k + 1]);
    out.f2[k] = -acc;
    out.phi1[k] = f1(q[k]);
    out.phi2[k] = s * out.f2[k] + f3(q[k]);
  }
  return out;
}

QuadraticSpec model_spec() {
  QuadraticSpec s;
  s.components = 2;
  s.terms.push_back({1, 0, 0, {0}, {0}, 1.0});
  return s;
}

std::string growth_name(GrowthKind k) {
  switch (k) {
    case GrowthKind::Null: return "null";
    case GrowthKind::Polynomial: return "polynomial";
    case GrowthKind::Exponential: return "exponential";
    case GrowthKind::Blowup: return "finite-s-blowup";
    case GrowthKind::Indeterminate: return "indeterminate";
  }
  return "?";
}

namespace {

struct LineFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  LineFit f;
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  const double cxy = sxy - sx * sy / n;
  if (vx <= 0.0) return f;
  f.slope = cxy / vx;
  f.intercept = (sy - f.slope * sx) / n;
  f.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  return f;
}

}  // namespace

GrowthResult classify_growth(const AsymCoeffs& c, const std::vector<std::vector<double>>& phi0,
                             const AsymGrid& g) {
  const AsymState st = integrate_asym_system(c, phi0, g);
  GrowthResult res;
  const auto& first = st.history.front();
  const size_t comps = first.psi.size();
  std::vector<Field> dpsi0(comps);
  double norm0 = 0.0;
  for (size_t j = 0; j < comps; ++j) {
    dpsi0[j] = d_q(first.psi[j], g.dq);
    for (size_t i = 0; i < dpsi0[j].size(); ++i)
      norm0 = std::max({norm0, std::abs(first.psi[j][i]), std::abs(dpsi0[j][i])});
  }

  std::vector<double> s, dev, osc0(comps, 0.0);
  std::vector<std::vector<double>> grad(comps);
  for (size_t j = 0; j < comps; ++j) {
    const auto [lo, hi] = std::minmax_element(first.psi[j].begin(), first.psi[j].end());
    osc0[j] = *hi - *lo;
  }
  for (const auto& snap : st.history) {
    double d = 0.0;
    for (size_t j = 0; j < comps; ++j) {
      const Field dp = d_q(snap.psi[j], g.dq);
      double k = 0.0;
      for (size_t i = 0; i < dp.size(); ++i) {
        d = std::max({d, std::abs(snap.psi[j][i] - first.psi[j][i]), std::abs(dp[i] - dpsi0[j][i])});
        k = std::max(k, std::abs(dp[i]));
      }
      grad[j].push_back(k);
    }
    s.push_back(snap.s);
    dev.push_back(d);
  }

  // Finite-s blow-up: overflow, sup exceeding 1e3/ds, or a profile steepening until its
  // whole oscillation fits in two cells.
  size_t hit = s.size(), which = 0;
  for (size_t j = 0; j < comps; ++j) {
    const double cap = osc0[j] > 0.0 ? std::min(1e3 / g.ds, 0.5 * osc0[j] / g.dq) : 1e3 / g.ds;
    for (size_t k = 0; k < s.size() && k < hit; ++k)
      if (grad[j][k] > cap) {
        hit = k;
        which = j;
        break;
      }
  }
  if (st.overflow || hit < s.size()) {
    res.kind = GrowthKind::Blowup;
    if (hit == s.size()) {
      for (size_t j = 0; j < comps; ++j)
        if (grad[j].back() / std::max(grad[j].front(), 1e-300) >
            grad[which].back() / std::max(grad[which].front(), 1e-300))
          which = j;
    }
    // 1/K is linear in s up to a gradient catastrophe; extrapolate its zero.
    std::vector<double> xs, ys;
    const size_t end = std::min(hit + 1, s.size());
    for (size_t k = end / 2; k < end; ++k) {
      xs.push_back(s[k]);
      ys.push_back(1.0 / grad[which][k]);
    }
    const LineFit f = fit_line(xs, ys);
    res.blowup_s = (f.slope < 0.0) ? -f.intercept / f.slope : (st.overflow ? st.overflow_s : s[end - 1]);
    res.r2_poly = f.r2;
    return res;
  }

  if (dev.back() <= 1e-10 * (1.0 + norm0)) {
    res.kind = GrowthKind::Null;
    return res;
  }

  std::vector<double> ls, lss, lg;
  for (size_t k = s.size() / 2; k < s.size(); ++k) {
    const double sig = s[k] - s.front();
    if (sig <= 0.0 || dev[k] <= 0.0) continue;
    lss.push_back(std::log(sig));
    ls.push_back(sig);
    lg.push_back(std::log(dev[k]));
  }
  if (lg.size() < 3) return res;
  const LineFit poly = fit_line(lss, lg);
  const LineFit expo = fit_line(ls, lg);
  res.r2_poly = poly.r2;
  res.r2_exp = expo.r2;
  const bool poly_ok = poly.r2 >= 0.95 && poly.slope < 5.0;
  const bool exp_ok = expo.r2 >= 0.95;
  if (poly_ok && (!exp_ok || poly.r2 >= expo.r2)) {
    res.kind = GrowthKind::Polynomial;
    res.degree = poly.slope;
  } else if (exp_ok) {
    res.kind = GrowthKind::Exponential;
    res.rate = expo.slope;
  }
  return res;
}

void check_einstein_constraints(const EinsteinData& d, double M, double Q, double tol) {
  double worst = 0.0, worst_q = 0.0;
  const int n = 400;
  for (int i = 0; i <= n; ++i) {
    const double q = -Q + 2.0 * Q * i / n;
    const Mat4 h = d.h_inf(q);
    const double v = std::max({std::abs(h(kL, kL) - 2.0 * M), std::abs(h(kL, kS1)), std::abs(h(kL, kS2)),
                               std::abs(h(kS1, kS1) + h(kS2, kS2) - 2.0 * M)});
    if (v > worst) {
      worst = v;
      worst_q = q;
    }
  }
  if (worst > tol) {
    throw ValidationError("einstein_asym: wave-coordinate constraint violated by " + std::to_string(worst) +
                          " at q* = " + std::to_string(worst_q));
  }
}

EinsteinResult einstein_asym(const EinsteinData& d, double M, double Q, double dq, double s_max,
                             double ds, int save_every) {
  check_einstein_constraints(d, M, Q);
  EinsteinResult res;
  const int n = static_cast<int>(std::lround(2.0 * Q / dq));
  res.q.resize(n + 1);
  for (int i = 0; i <= n; ++i) res.q[i] = -Q + i * dq;
  std::vector<Mat4> psi(n + 1);
  for (int i = 0; i <= n; ++i) psi[i] = d.dh_inf(res.q[i]);

  auto rhs = [&](const std::vector<Mat4>& p, double s) {
    std::vector<Mat4> out(n + 1);
    for (int i = 0; i <= n; ++i) {
      Mat4 dp;
      if (i >= 2 && i <= n - 2) {
        dp = (-p[i + 2] + 8.0 * p[i + 1] - 8.0 * p[i - 1] + p[i - 2]) / (12.0 * dq);
      } else if (i == 0) {
        dp = (-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * dq);
      } else if (i == n) {
        dp = (3.0 * p[n] - 4.0 * p[n - 1] + p[n - 2]) / (2.0 * dq);
      } else {
        dp = (p[i + 1] - p[i - 1]) / (2.0 * dq);
      }
      out[i] = M * dp;
      out[i](kLbar, kLbar) += 2.0 * p_s(p[i], p[i]);
    }
    // Inflow boundary at q = +Q follows the data along its characteristic.
    const double h = 1e-6;
    out[n] = (d.dh_inf(Q + M * (s + h)) - d.dh_inf(Q + M * (s - h))) / (2.0 * h);
    out[n](kLbar, kLbar) += 2.0 * p_s(p[n], p[n]);
    return out;
  };
  auto add = [&](const std::vector<Mat4>& a, double f, const std::vector<Mat4>& b) {
    std::vector<Mat4> o(a.size());
    for (size_t i = 0; i < a.size(); ++i) o[i] = a[i] + f * b[i];
    return o;
  };

  auto ps_density = [&](double x) {
    const Mat4 v = d.dh_inf(x);
    return p_s(v, v);
  };
  // Tail integrals int_{q_i + M s}^inf P_S, accumulated segment by segment from the top.
  auto tails = [&](double s) {
    using boost::math::quadrature::gauss;
    std::vector<double> tail(n + 1);
    tail[n] = integrate(ps_density, Q + M * s, std::numeric_limits<double>::infinity(), 1e-13).value;
    for (int i = n - 1; i >= 0; --i)
      tail[i] = tail[i + 1] + gauss<double, 10>::integrate(ps_density, res.q[i] + M * s, res.q[i + 1] + M * s);
    return tail;
  };
  auto closed_at = [&](int i, double s, const std::vector<double>& tail) {
    Mat4 h = d.h_inf(res.q[i] + M * s);
    h(kLbar, kLbar) -= 2.0 * s * tail[i];
    return h;
  };

  auto record = [&](double s) {
    res.s.push_back(s);
    std::vector<Mat4> hq(n + 1), cq(n + 1);
    const auto tail = tails(s);
    const Mat4 top = closed_at(n, s, tail);
    Mat4 trap = Mat4::Zero();
    hq[n] = top;
    const auto psi_end_d = [&](int i) -> Mat4 {
      if (i == 0) return (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / (2.0 * dq);
      if (i == n) return (3.0 * psi[n] - 4.0 * psi[n - 1] + psi[n - 2]) / (2.0 * dq);
      return (psi[i + 1] - psi[i - 1]) / (2.0 * dq);
    };
    const Mat4 dn = psi_end_d(n);
    for (int k = n - 1; k >= 0; --k) {
      trap += 0.5 * dq * (psi[k] + psi[k + 1]);
      hq[k] = top - trap + dq * dq / 12.0 * (dn - psi_end_d(k));
    }
    for (int i = 0; i <= n; ++i) {
      cq[i] = closed_at(i, s, tail);
      res.max_difference = std::max(res.max_difference, (hq[i] - cq[i]).cwiseAbs().maxCoeff());
    }
    res.integrated.push_back(std::move(hq));
    res.closed.push_back(std::move(cq));
  };

  const int steps = static_cast<int>(std::ceil(s_max / ds - 1e-9));
  const double h = steps > 0 ? s_max / steps : 0.0;
  record(0.0);
  for (int k = 1; k <= steps; ++k) {
    const double s = (k - 1) * h;
    const auto k1 = rhs(psi, s);
    const auto k2 = rhs(add(psi, 0.5 * h, k1), s + 0.5 * h);
    const auto k3 = rhs(add(psi, 0.5 * h, k2), s + 0.5 * h);
    const auto k4 = rhs(add(psi, h, k3), s + h);
    for (int i = 0; i <= n; ++i) psi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (k % save_every == 0 || k == steps) record(k * h);
  }
  return res;
}

}  // namespace nulllab
