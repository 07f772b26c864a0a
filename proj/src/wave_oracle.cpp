#include "nulllab/wave_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nulllab {

namespace {

Vec3 fd_gradient(const std::function<double(const Vec3&)>& f, const Vec3& y) {
  // Fourth-order stencil; h ~ eps^(1/5) balances truncation against roundoff.
  const double h = 1e-3 * std::max(1.0, y.norm());
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    Vec3 p1 = y, m1 = y, p2 = y, m2 = y;
    p1[i] += h;
    m1[i] -= h;
    p2[i] += 2.0 * h;
    m2[i] -= 2.0 * h;
    g[i] = (8.0 * (f(p1) - f(m1)) - (f(p2) - f(m2))) / (12.0 * h);
  }
  return g;
}

/// Azimuthal mean of a smooth periodic function, trapezoid doubled until two levels agree.
double periodic_mean(const std::function<double(double)>& g, double tol) {
  int m = 8;
  double sum = 0.0;
  for (int k = 0; k < m; ++k) sum += g(2.0 * M_PI * k / m);
  double prev = sum / m;
  while (m < 4096) {
    for (int k = 0; k < m; ++k) sum += g(2.0 * M_PI * (k + 0.5) / m);
    m *= 2;
    const double cur = sum / m;
    if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  throw NumericalError("kirchhoff: azimuthal average did not converge");
}

double lagrange4(const double* y, double x) {
  // Nodes at 0, 1, 2, 3.
  const double l0 = -(x - 1) * (x - 2) * (x - 3) / 6.0;
  const double l1 = x * (x - 2) * (x - 3) / 2.0;
  const double l2 = -x * (x - 1) * (x - 3) / 2.0;
  const double l3 = x * (x - 1) * (x - 2) / 6.0;
  return l0 * y[0] + l1 * y[1] + l2 * y[2] + l3 * y[3];
}

double mode_potential(int ell, double r) { return ell == 0 ? 0.0 : ell * (ell + 1) / (r * r); }

/// Second lattice layer t = h by a third-order Taylor expansion of psi_tt = psi_rr - V psi + r F.
double taylor_layer(const ModeData& d, const ModeSource& F, int ell, double r, double h) {
  const double sgn = ell % 2 == 0 ? -1.0 : 1.0;
  auto ext = [sgn](const Fn1& f, double x) { return x >= 0.0 ? f(x) : sgn * f(-x); };
  const double p0 = d.psi0(r), p1 = d.psi1(r);
  const double p0rr = (ext(d.psi0, r + h) - 2.0 * p0 + ext(d.psi0, r - h)) / (h * h);
  const double p1rr = (ext(d.psi1, r + h) - 2.0 * p1 + ext(d.psi1, r - h)) / (h * h);
  const double V = mode_potential(ell, r);
  const double f0 = F ? r * F(0.0, r) : 0.0;
  const double ft = F ? (r * F(h, r) - f0) / h : 0.0;
  return p0 + h * p1 + 0.5 * h * h * (p0rr - V * p0 + f0) + h * h * h / 6.0 * (p1rr - V * p1 + ft);
}

}  // namespace

QuadResult kirchhoff(const KirchhoffData& d, double t, const Vec3& x, double tol) {
  if (!(t >= 0.0)) throw DomainError("kirchhoff: requires t >= 0");
  if (!d.w0 && !d.w1) return {};
  if (t == 0.0) return {d.w0 ? d.w0(x) : 0.0, 0.0};
  const double r = x.norm();
  const Vec3 e = r > 0.0 ? Vec3(-x / r) : Vec3::UnitZ();
  Vec3 ea, eb;
  orthonormal_complement(e, ea, eb);

  // sigma = 1 - <omega, e>; |x + t omega|^2 = (r - t)^2 + 2 t r sigma.
  double smax = 2.0;
  const double R = d.support_radius;
  if (std::isfinite(R)) {
    if (r == 0.0) {
      if (t >= R) return {};
    } else {
      const double num = R * R - (r - t) * (r - t);
      if (num <= 0.0) return {};
      smax = std::min(2.0, num / (2.0 * t * r));
    }
  }
  auto integrand = [&](double sigma) {
    const double mu = 1.0 - sigma;
    const double st = std::sqrt(std::max(0.0, sigma * (2.0 - sigma)));
    return periodic_mean(
        [&](double ph) {
          const Vec3 w = mu * e + st * (std::cos(ph) * ea + std::sin(ph) * eb);
          const Vec3 y = x + t * w;
          double v = 0.0;
          if (d.w1) v += t * d.w1(y);
          if (d.w0) {
            const Vec3 g = d.grad_w0 ? d.grad_w0(y) : fd_gradient(d.w0, y);
            v += t * g.dot(w) + d.w0(y);
          }
          return v;
        },
        0.1 * tol);
  };
  QuadResult res = integrate(integrand, 0.0, smax, tol, 18, 1e-15);
  res.value *= 0.5;
  res.error *= 0.5;
  return res;
}

bool ModeGrid::valid(int a, int b) const {
  if (a > b) std::swap(a, b);
  return b >= 0 && b <= b_max() && a >= -b && a + b <= n_cap_;
}

double ModeGrid::node(int a, int b) const {
  if (a > b) return (ell_ % 2 == 0 ? -1.0 : 1.0) * node(b, a);
  return rows_[b][a + b];
}

bool ModeGrid::contains(double t, double r) const {
  return t >= 0.0 && r >= 0.0 && t + r <= v_max() + 1e-12 && 2.0 * t <= n_cap_ * delta_ + 1e-12;
}

double ModeGrid::rphi(double t, double r) const {
  if (!contains(t, r)) throw DomainError("ModeGrid: point outside the computed domain");
  const double xa = (t - r) / delta_, xb = (t + r) / delta_;
  const int bmax = b_max();
  int b0 = static_cast<int>(std::floor(xb)) - 1;
  b0 = std::clamp(b0, 0, std::max(0, bmax - 3));
  double col[4];
  for (int j = 0; j < 4; ++j) {
    const int bj = b0 + j;
    // Row bj holds a in [-bj, min(b_max, n_cap - bj)], counting mirrored nodes past the axis.
    const int lo = -bj, hi = std::min(bmax, n_cap_ - bj);
    if (hi - lo < 3) throw DomainError("ModeGrid: interpolation stencil leaves the lattice");
    const int a0 = std::clamp(static_cast<int>(std::floor(xa)) - 1, lo, hi - 3);
    double y[4];
    for (int i = 0; i < 4; ++i) {
      if (!valid(a0 + i, bj)) throw DomainError("ModeGrid: interpolation stencil leaves the lattice");
      y[i] = node(a0 + i, bj);
    }
    col[j] = lagrange4(y, xa - a0);
  }
  return lagrange4(col, xb - b0);
}

double ModeGrid::phi(double t, double r) const {
  const double re = std::max(r, 0.25 * delta_);
  return rphi(t, re) / re;
}

ModeGrid solve_mode(const ModeSource& F, const ModeData& data, const ModeGridSpec& spec) {
  if (!(spec.delta > 0.0) || !(spec.t_max > 0.0) || !(spec.r_max >= 0.0))
    throw DomainError("solve_mode: requires delta > 0, t_max > 0, r_max >= 0");
  if (spec.ell < 0 || spec.ell > kMaxEll) throw DomainError("solve_mode: mode index outside 0..8");
  if (!data.psi0 || !data.psi1) throw ValidationError("solve_mode: missing data");
  if (std::abs(data.psi0(0.0)) > 1e-12) throw ValidationError("solve_mode: r phi must vanish at r = 0");
  const double D = spec.delta;
  const long B = static_cast<long>(std::ceil((spec.t_max + spec.r_max) / D - 1e-9));
  if (B > 12000) throw DomainError("solve_mode: lattice too large, increase delta");

  ModeGrid g;
  g.delta_ = D;
  g.ell_ = spec.ell;
  g.n_cap_ = static_cast<int>(std::ceil(2.0 * spec.t_max / D - 1e-9));
  g.rows_.resize(B + 1);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const int ell = spec.ell;
  const double h = 0.5 * D;
  for (int b = 0; b <= B; ++b) {
    auto& row = g.rows_[b];
    row.assign(2 * b + 1, nan);
    for (int a = -b; a <= b; ++a) {
      const int n = a + b;
      if (n > g.n_cap_) break;
      const double r = 0.5 * (b - a) * D;
      double v;
      if (a == b) {
        v = 0.0;
      } else if (n == 0) {
        v = data.psi0(r);
      } else if (n == 1) {
        v = taylor_layer(data, F, ell, r, h);
      } else {
        const double E = g.rows_[b][a - 1 + b];
        const double W = g.rows_[b - 1][a + b - 1];
        const double S = g.rows_[b - 1][a - 1 + b - 1];
        const double tc = 0.5 * (n - 1) * D;
        const double src = F ? r * F(tc, r) : 0.0;
        v = E + W - S + 0.25 * D * D * (src - mode_potential(ell, r) * 0.5 * (E + W));
      }
      if (!std::isfinite(v)) throw NumericalError("solve_mode: non-finite value");
      row[a + b] = v;
    }
  }
  return g;
}

RefinedModeSolution solve_mode_refined(const ModeSource& F, const ModeData& data, const ModeGridSpec& spec,
                                       const std::vector<std::array<double, 2>>& points, double rel_target,
                                       double floor) {
  const ModeGrid coarse = solve_mode(F, data, spec);
  ModeGridSpec fs = spec;
  fs.delta = 0.5 * spec.delta;
  const ModeGrid fine = solve_mode(F, data, fs);
  RefinedModeSolution out;
  for (const auto& p : points) {
    const double c = coarse.phi(p[0], p[1]);
    const double f = fine.phi(p[0], p[1]);
    const double value = f + (f - c) / 3.0;
    const double est = std::abs(f - c) / 3.0;
    if (est > rel_target * std::max(std::abs(value), floor)) {
      std::ostringstream os;
      os << "solve_mode: grid too coarse at (t, r) = (" << p[0] << ", " << p[1] << "), error estimate " << est
         << "; refine delta below " << spec.delta;
      throw NumericalError(os.str());
    }
    out.phi.push_back(value);
    out.error_estimate.push_back(est);
  }
  return out;
}

double mode_energy(const ModeGrid& g, int n) {
  const double D = g.delta();
  double e = 0.0;
  for (int k = n % 2; ; k += 2) {
    // Level n node (a, b) = ((n - k)/2, (n + k)/2); level n + 2 raises both by one.
    const int a = (n - k) / 2, b = (n + k) / 2;
    if (!g.valid(a + 1, b + 1) || !g.valid(a, b) || !g.valid(a + 1, b) || !g.valid(a, b + 1)) break;
    const double pt = (g.node(a + 1, b + 1) - g.node(a, b)) / D;
    const double pr = (g.node(a, b + 1) - g.node(a + 1, b)) / D;
    double dens = pt * pt + pr * pr;
    const double r = 0.5 * k * D;
    if (k > 0 && g.ell() > 0) {
      const double pm = 0.5 * (g.node(a, b + 1) + g.node(a + 1, b));
      dens += mode_potential(g.ell(), r) * pm * pm;
    }
    e += (k == 0 ? 0.5 : 1.0) * dens * D;
  }
  return e;
}

std::string extrapolation_name(ExtrapolationFlag f) {
  switch (f) {
    case ExtrapolationFlag::Exact:
      return "exact";
    case ExtrapolationFlag::Converged:
      return "converged";
    case ExtrapolationFlag::NotConverging:
      return "not-converging";
    case ExtrapolationFlag::Unreliable:
      return "unreliable";
  }
  return "unknown";
}

RadiationField extract_radiation_field(const ScalarField& u, const Vec3& omega, const std::vector<double>& q,
                                       double r0, double rate_min, double rate_max) {
  if (!(r0 > 0.0)) throw DomainError("extract_radiation_field: requires r0 > 0");
  if (std::abs(omega.norm() - 1.0) > 1e-12) throw DomainError("extract_radiation_field: omega must be a unit vector");
  RadiationField out;
  out.q = q;
  out.radii = {r0, 2.0 * r0, 4.0 * r0};
  for (double qq : q) {
    std::array<double, 3> U{};
    for (int i = 0; i < 3; ++i) {
      const double r = out.radii[i];
      if (r - qq < 0.0) throw DomainError("extract_radiation_field: cone t = r - q starts before t = 0");
      U[i] = r * u(r - qq, r * omega);
    }
    out.samples.push_back(U);
    const double d1 = U[1] - U[0], d2 = U[2] - U[1];
    const double scale = std::max({std::abs(U[0]), std::abs(U[1]), std::abs(U[2]), 1e-300});
    double uinf = U[2], rate = std::numeric_limits<double>::quiet_NaN();
    ExtrapolationFlag flag;
    if (std::abs(d1) <= 1e-12 * scale && std::abs(d2) <= 1e-12 * scale) {
      flag = ExtrapolationFlag::Exact;
    } else if (d1 * d2 <= 0.0) {
      flag = ExtrapolationFlag::Unreliable;
    } else {
      const double rho = d2 / d1;
      rate = -std::log2(rho);
      if (rho >= 1.0 || rate < rate_min) {
        flag = ExtrapolationFlag::NotConverging;
      } else if (rate > rate_max) {
        flag = ExtrapolationFlag::Unreliable;
      } else {
        flag = ExtrapolationFlag::Converged;
        uinf = U[2] + d2 * rho / (1.0 - rho);
      }
    }
    out.u_inf.push_back(uinf);
    out.rate.push_back(rate);
    out.flag.push_back(flag);
  }
  return out;
}

ModelSystemReport run_model_system(const ModelSystemSpec& spec) {
  if (!spec.phi1.psi0 || !spec.phi1.psi1) throw ValidationError("run_model_system: missing data");
  if (!(spec.support > 0.0) || !(spec.delta > 0.0)) throw DomainError("run_model_system: requires support, delta > 0");
  if (!(spec.r_min > 0.0) || !(spec.r_max > spec.r_min) || spec.samples < 3)
    throw DomainError("run_model_system: requires 0 < r_min < r_max and at least 3 samples");
  if (spec.q.empty()) throw DomainError("run_model_system: empty q grid");
  const double D = spec.delta;
  const double h = 0.5 * D;

  // Strip u in [a0 D, a1 D]; phi1 and phi2 vanish for q = -u > support.
  const int a0 = static_cast<int>(std::floor(-spec.support / D)) - 2;
  const double qmin = *std::min_element(spec.q.begin(), spec.q.end());
  const int a1 = std::max(a0 + 4, static_cast<int>(std::ceil(-qmin / D)) + 3);
  const int ncol = a1 - a0 + 1;
  const long bmax = static_cast<long>(std::ceil((2.0 * spec.r_max + a1 * D) / D)) + 2;
  if (static_cast<double>(bmax) * ncol > 1e9) throw DomainError("run_model_system: lattice too large");

  // Sample rows per column, log-spaced in r.
  std::vector<std::vector<std::pair<long, double>>> targets(ncol);
  for (int c = 0; c < ncol; ++c) {
    const int a = a0 + c;
    for (int j = 0; j < spec.samples; ++j) {
      const double r = spec.r_min * std::pow(spec.r_max / spec.r_min, j / (spec.samples - 1.0));
      const long b = std::lround((2.0 * r + a * D) / D);
      targets[c].push_back({b, 0.0});
    }
  }
  std::vector<size_t> next(ncol, 0);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> p1_prev(ncol, nan), p1_cur(ncol, nan), p2_prev(ncol, nan), p2_cur(ncol, nan);
  const ModeSource none;
  for (long b = 0; b <= bmax; ++b) {
    std::fill(p1_cur.begin(), p1_cur.end(), nan);
    std::fill(p2_cur.begin(), p2_cur.end(), nan);
    for (int c = 0; c < ncol; ++c) {
      const int a = a0 + c;
      if (a < -b || a > b) continue;
      const long n = a + b;
      const double r = 0.5 * (b - a) * D;
      double v1, v2;
      if (a == b) {
        v1 = v2 = 0.0;
      } else if (c == 0) {
        v1 = v2 = 0.0;
      } else if (n == 0) {
        v1 = spec.phi1.psi0(r);
        v2 = 0.0;
      } else if (n == 1) {
        v1 = taylor_layer(spec.phi1, none, 0, r, h);
        // phi2 starts from rest with r F = -(d_t psi1)^2 / r.
        const double pt0 = spec.phi1.psi1(r);
        const double f0 = -pt0 * pt0 / r;
        const double pth = (v1 - spec.phi1.psi0(r)) / h;
        const double fh = -pth * pth / r;
        v2 = 0.5 * h * h * f0 + h * h * h / 6.0 * (fh - f0) / h;
      } else {
        const double E1 = p1_cur[c - 1], W1 = p1_prev[c], S1 = p1_prev[c - 1];
        v1 = E1 + W1 - S1;
        const double pt = (v1 - S1) / D;
        const double src = -pt * pt / r;
        v2 = p2_cur[c - 1] + p2_prev[c] - p2_prev[c - 1] + 0.25 * D * D * src;
      }
      p1_cur[c] = v1;
      p2_cur[c] = v2;
      while (next[c] < targets[c].size() && targets[c][next[c]].first == b) targets[c][next[c]++].second = v2;
    }
    std::swap(p1_prev, p1_cur);
    std::swap(p2_prev, p2_cur);
  }

  // Least-squares fit of psi2 = alpha ln r + beta per column.
  std::vector<double> alpha(ncol), beta(ncol), resid(ncol);
  for (int c = 0; c < ncol; ++c) {
    const int a = a0 + c;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = static_cast<int>(targets[c].size());
    for (const auto& [b, y] : targets[c]) {
      const double x = std::log(0.5 * (b - a) * D);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double det = m * sxx - sx * sx;
    alpha[c] = (m * sxy - sx * sy) / det;
    beta[c] = (sy - alpha[c] * sx) / m;
    double ss = 0.0;
    for (const auto& [b, y] : targets[c]) {
      const double x = std::log(0.5 * (b - a) * D);
      ss += std::pow(y - alpha[c] * x - beta[c], 2);
    }
    resid[c] = std::sqrt(ss / m);
  }

  ModelSystemReport rep;
  for (double q : spec.q) {
    rep.q.push_back(q);
    const double xa = -q / D - a0;  // fractional column
    if (xa < 1.0) {
      rep.alpha.push_back(0.0);
      rep.beta.push_back(0.0);
      rep.fit_residual.push_back(0.0);
      continue;
    }
    const int c0 = std::clamp(static_cast<int>(std::floor(xa)) - 1, 0, ncol - 4);
    rep.alpha.push_back(lagrange4(&alpha[c0], xa - c0));
    rep.beta.push_back(lagrange4(&beta[c0], xa - c0));
    rep.fit_residual.push_back(lagrange4(&resid[c0], xa - c0));
  }
  return rep;
}

}  // namespace nulllab
