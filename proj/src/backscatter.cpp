#include "nulllab/backscatter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "nulllab/cutoffs.hpp"

namespace nulllab {

SourceProfile bracket_power_profile(double p, double amp) {
  SourceProfile s;
  s.n = [p, amp](double q, const Vec3&) { return amp * std::pow(1.0 + q * q, -0.5 * p); };
  s.a = p - 1.0;
  s.spherical = true;
  s.name = "bracket^-" + std::to_string(p);
  return s;
}

SourceProfile gaussian_profile(double c, double amp) {
  SourceProfile s;
  s.n = [c, amp](double q, const Vec3&) { return amp * std::exp(-c * q * q); };
  s.a = 1.0;
  s.spherical = true;
  s.name = "gaussian";
  return s;
}

SourceProfile tilted_profile(double p, double beta) {
  SourceProfile s;
  s.n = [p, beta](double q, const Vec3& w) { return std::pow(1.0 + q * q, -0.5 * p) * (1.0 + beta * w.z()); };
  s.a = p - 1.0;
  s.spherical = false;
  s.name = "tilted";
  return s;
}

namespace {

using ProfileFn = std::function<double(double, const Vec3&)>;

Vec3 rotate_in_plane(const Vec3& w, int i, int j, double th) {
  Vec3 out = w;
  const double c = std::cos(th), s = std::sin(th);
  out(i) = c * w(i) - s * w(j);
  out(j) = s * w(i) + c * w(j);
  return out;
}

/// op 0: <q> d_q; ops 1..3: rotations in the (0,1), (0,2), (1,2) planes.
ProfileFn apply_op(const ProfileFn& f, int op) {
  static const int planes[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  if (op == 0) {
    return [f](double q, const Vec3& w) {
      const double h = 1e-4 * jbracket(q);
      return jbracket(q) * (f(q + h, w) - f(q - h, w)) / (2.0 * h);
    };
  }
  const int i = planes[op - 1][0], j = planes[op - 1][1];
  return [f, i, j](double q, const Vec3& w) {
    const double h = 1e-4;
    return (f(q, rotate_in_plane(w, i, j, h)) - f(q, rotate_in_plane(w, i, j, -h))) / (2.0 * h);
  };
}

}  // namespace

ProfileCheck check_profile(const SourceProfile& n, int N, double q_max, int samples) {
  if (N < 0 || N > 2) throw DomainError("check_profile: derivative budget must be 0, 1 or 2");
  std::vector<ProfileFn> terms{n.n};
  std::vector<ProfileFn> level{n.n};
  for (int d = 1; d <= N; ++d) {
    std::vector<ProfileFn> next;
    for (const auto& f : level)
      for (int op = 0; op < 4; ++op) {
        if (n.spherical && op > 0) continue;
        next.push_back(apply_op(f, op));
      }
    terms.insert(terms.end(), next.begin(), next.end());
    level = std::move(next);
  }
  const Vec3 dirs[] = {Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(0.6, 0.0, 0.8), Vec3(0.48, 0.6, 0.64),
                       Vec3(0.0, -0.6, -0.8)};
  ProfileCheck out;
  for (int k = 0; k < samples; ++k) {
    const double q = -q_max + 2.0 * q_max * k / (samples - 1);
    for (const auto& w : dirs) {
      double sum = 0.0;
      for (const auto& f : terms) sum += std::abs(f(q, w));
      const double c = sum * std::pow(jbracket(q), 1.0 + n.a);
      if (c > out.constant) {
        out.constant = c;
        out.worst_q = q;
      }
      if (n.spherical) break;
    }
  }
  return out;
}

RetardedGeometry retarded_geometry(double t, const Vec3& x, double q, const Vec3& omega) {
  RetardedGeometry g;
  const double r = x.norm();
  const double u = t + q - x.dot(omega);
  if (t + q < r || u <= 0.0) {
    g.valid = (t + q >= r);
    if (g.valid) g.s = -q;
    return g;
  }
  g.valid = true;
  g.rho = 0.5 * ((t + q) * (t + q) - r * r) / u;
  g.s = g.rho - q;
  return g;
}

bool retarded_inequalities_hold(double t, const Vec3& x, double q, const Vec3& omega, RetardedGeometry* out,
                                double tol) {
  const RetardedGeometry g = retarded_geometry(t, x, q, omega);
  if (out) *out = g;
  if (!g.valid) return false;
  const double r = x.norm();
  const double slack = tol * (1.0 + std::abs(t) + std::abs(q) + r);
  const double two_rho = 2.0 * g.rho;
  return t + q - r >= -slack && t + q - r <= two_rho + slack && two_rho <= t + q + r + slack &&
         t - r <= g.rho + g.s + slack && g.rho + g.s <= t + r + slack;
}

double eval_source(const SourceProfile& n, double t, const Vec3& x) {
  const double r = x.norm();
  if (!(r > 0.0)) throw DomainError("eval_source: requires r > 0");
  if (!(t + r > 0.0)) return 0.0;
  const double c = chi_bump(jbracket(r - t) / (t + r));
  if (c == 0.0) return 0.0;
  return n.n(r - t, x / r) * c / (r * r);
}

QuadResult integrate_to_infinity(const Fn1& f, double a, double tol, bool log_left) {
  const double near = a + 1.0;
  QuadResult res = log_left ? integrate_log_left(f, a, near, tol) : integrate(f, a, near, tol);
  const double X = std::max(16.0, 4.0 * (std::abs(a) + 1.0));
  // Cuts at 0 and +-4^k keep features near q = 0 visible on long intervals; cuts at a + 2^k
  // resolve the endpoint behaviour at a.
  std::vector<double> cuts{near, X};
  for (double c = -std::pow(4.0, 20); c < X; c = c < -1.0 ? c / 4.0 : (c < 0.0 ? 0.0 : (c == 0.0 ? 1.0 : 4.0 * c)))
    if (c > near) cuts.push_back(c);
  for (double d = 2.0; a + d < X; d *= 2.0) cuts.push_back(a + d);
  std::sort(cuts.begin(), cuts.end());
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (!(cuts[k + 1] > cuts[k])) continue;
    const QuadResult piece = integrate(f, cuts[k], cuts[k + 1], tol, 18, 1e-17);
    res.value += piece.value;
    res.error += piece.error;
  }
  const QuadResult tail = integrate(
      [&](double y) {
        const double q = X * std::exp(y);
        return f(q) * q;
      },
      0.0, std::log(1e150 / X), tol);
  res.value += tail.value;
  res.error += tail.error;
  return res;
}

namespace {

void check_kernel_args(double t, double r) {
  if (!(r > 0.0)) throw DomainError("kernel: requires r > 0");
  if (!(t + r > 0.0)) throw DomainError("kernel: requires t + r > 0");
}

}  // namespace

QuadResult phi1(const SourceProfile& n, double t, double r, const Vec3& omega) {
  check_kernel_args(t, r);
  const double c = chi_bump(jbracket(r - t) / (t + r));
  if (c == 0.0) return {};
  const auto f = [&](double q) { return std::log((t + r + q) / (t - r + q)) * n.n(q, omega) / (2.0 * r); };
  QuadResult res = integrate_to_infinity(f, r - t);
  res.value *= c;
  res.error *= c;
  return res;
}

QuadResult phi1_plus(const SourceProfile& n, double t, double r, const Vec3& omega) {
  check_kernel_args(t, r);
  const double c = chi_bump(jbracket(r - t) / (t + r));
  if (c == 0.0) return {};
  const auto f = [&](double q) { return n.n(q, omega) / (2.0 * r); };
  QuadResult res = integrate_to_infinity(f, r - t, 1e-11, false);
  res.value *= c;
  res.error *= c;
  return res;
}

namespace {

/// Sphere average of n(q, .) for the x = 0 reductions.
double sphere_average(const SourceProfile& n, double q) {
  if (n.spherical) return n.n(q, Vec3::UnitZ());
  static const SphereRule rule = sphere_rule(32, 64);
  double s = 0.0;
  for (size_t k = 0; k < rule.nodes.size(); ++k) s += rule.weights[k] * n.n(q, rule.nodes[k]);
  return s;
}

/// q-range where chi(<q>/(t+r)) can be nonzero, intersected with q >= r - t.
bool cutoff_range(double t, double r, double& lo, double& hi) {
  const double qc2 = std::pow(0.75 * (t + r), 2) - 1.0;
  if (qc2 <= 0.0) return false;
  hi = std::sqrt(qc2);
  lo = std::max(r - t, -hi);
  return lo < hi;
}

/// Azimuthal trapezoid over phi' about x, doubled until two levels agree.
double azimuth_average(const std::function<double(double)>& g) {
  int m = 16;
  double prev = 0.0;
  for (int k = 0; k < m; ++k) prev += g(2.0 * M_PI * k / m);
  prev /= m;
  while (m < 1024) {
    double odd = 0.0;
    for (int k = 0; k < m; ++k) odd += g(2.0 * M_PI * (k + 0.5) / m);
    const double cur = 0.5 * (prev + odd / m);
    m *= 2;
    if (std::abs(cur - prev) < 1e-9 * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

struct RayFrame {
  Vec3 e, a, b;
  double r;
};

RayFrame ray_frame(const Vec3& x) {
  RayFrame f;
  f.r = x.norm();
  f.e = x / f.r;
  orthonormal_complement(f.e, f.a, f.b);
  return f;
}

Vec3 direction(const RayFrame& f, double w1, double phi) {
  const double s = std::sqrt(std::max(0.0, 1.0 - w1 * w1));
  return w1 * f.e + s * (std::cos(phi) * f.a + std::sin(phi) * f.b);
}

/// Outer q integral over the cutoff range, split where the cutoff plateaus start and end
/// and at a geometric ladder around q = 0 so narrow profiles are not stepped over.
QuadResult outer(const Fn1& inner, double t, double r, double lo) {
  double qlo = 0.0, qhi = 0.0;
  if (!cutoff_range(t, r, qlo, qhi)) return {};
  std::vector<double> cuts{qlo, qhi};
  for (double c : {0.5 * (t - r), 0.5 * (t + r), 0.75 * (t - r), 0.75 * (t + r)}) {
    if (c > 1.0) {
      const double q = std::sqrt(c * c - 1.0);
      cuts.push_back(q);
      cuts.push_back(-q);
    }
  }
  for (double m = 1.0; m < std::max(std::abs(qlo), std::abs(qhi)); m *= 4.0) {
    cuts.push_back(m);
    cuts.push_back(-m);
  }
  cuts.push_back(0.0);
  std::sort(cuts.begin(), cuts.end());
  QuadResult res;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    if (a < qlo || b > qhi || !(b > a)) continue;
    const QuadResult part = (a == qlo && qlo <= lo) ? integrate_log_left(inner, a, b, 1e-10, 1e-13)
                                                    : integrate(inner, a, b, 1e-10, 18, 1e-13);
    res.value += part.value;
    res.error += part.error;
  }
  return res;
}

}  // namespace

QuadResult phi_exact(const SourceProfile& n, double t, const Vec3& x) {
  if (!(t >= 0.0)) throw DomainError("phi_exact: requires t >= 0");
  const double r = x.norm();
  if (r < 1e-12 * (1.0 + t)) {
    if (t <= 0.0) return {};
    return outer([&](double q) { return sphere_average(n, q) * chi_bump(jbracket(q) / t) / (t + q); }, t, 0.0,
                 -t);
  }
  const RayFrame fr = ray_frame(x);
  // Inner sphere integral in w = s + rho, which runs over [t-r, t+r] as omega_1 goes from 1 to -1:
  // (1/4pi) int n chi(<q>/w) dS / (t+q-<x,omega>) = (1/4pi r) int dphi' int n chi(<q>/w) dw / (w+q).
  auto inner = [&](double q) {
    if (!(t + q > r)) return 0.0;
    const double bq = jbracket(q);
    const double plateau_lo = std::max(t - r, 2.0 * bq);
    const double ramp_lo = std::max(t - r, 4.0 * bq / 3.0), ramp_hi = std::min(t + r, 2.0 * bq);
    if (n.spherical) {
      double v = 0.0;
      if (t + r > plateau_lo) v += std::log((t + r + q) / (plateau_lo + q));
      if (ramp_hi > ramp_lo)
        v += integrate([&](double w) { return chi_bump(bq / w) / (w + q); }, ramp_lo, ramp_hi, 1e-11).value;
      return n.n(q, fr.e) * v / (2.0 * r);
    }
    const double two_a = (t + q - r) * (t + q + r);
    auto along = [&](double phi) {
      auto g = [&](double w) {
        const double w1 = std::clamp((t + q - two_a / (w + q)) / r, -1.0, 1.0);
        return n.n(q, direction(fr, w1, phi)) * chi_bump(bq / w) / (w + q);
      };
      double v = 0.0;
      if (t + r > plateau_lo) v += integrate_endpoint_singular(g, plateau_lo, t + r, 1e-10).value;
      if (ramp_hi > ramp_lo) v += integrate_endpoint_singular(g, ramp_lo, ramp_hi, 1e-10).value;
      return v;
    };
    return azimuth_average(along) / (2.0 * r);
  };
  return outer(inner, t, r, r - t);
}

QuadResult phi2(const SourceProfile& n, double t, const Vec3& x) {
  const double r = x.norm();
  if (!(t + r > 0.0)) throw DomainError("phi2: requires t + r > 0");
  if (r < 1e-12 * (1.0 + t)) {
    return outer([&](double q) { return sphere_average(n, q) * chi_bump(jbracket(q) / t) / (t + q); }, t, 0.0,
                 -t);
  }
  const RayFrame fr = ray_frame(x);
  auto inner = [&](double q) {
    const double c = chi_bump(jbracket(q) / (t + r));
    if (c == 0.0) return 0.0;
    const double u_lo = t + q - r, u_hi = t + q + r;
    if (!(u_lo > 0.0)) return 0.0;
    if (n.spherical) return c * n.n(q, fr.e) * std::log(u_hi / u_lo) / (2.0 * r);
    auto along = [&](double phi) {
      return integrate(
                 [&](double y) { return n.n(q, direction(fr, (t + q - std::exp(y)) / r, phi)); },
                 std::log(u_lo), std::log(u_hi), 1e-10)
          .value;
    };
    return c * azimuth_average(along) / (2.0 * r);
  };
  return outer(inner, t, r, r - t);
}

double s0_envelope(double t, double r) {
  if (r < 0.0) throw DomainError("s0_envelope: requires r >= 0");
  if (r == 0.0) return 2.0 * t * t / (1.0 + t * t);
  return t / (2.0 * r) * std::log1p(4.0 * t * r / (1.0 + (t - r) * (t - r)));
}

QuadResult log_kernel_integral(const Fn1& m, double t, double r) {
  const double base = 0.5 * std::log1p(4.0 * t * r / (1.0 + (t - r) * (t - r)));
  return integrate_to_infinity(
      [&](double q) { return (std::log(std::abs((t + r + q) / (t - r + q))) - base) * m(q); }, r - t);
}

double log_kernel_envelope(double t, double r, double b) {
  const double L = jbracket(t - r);
  if (r >= t || b < 1.0) return std::pow(L, -b);
  if (b > 1.0) return 1.0 / L;
  return (1.0 + std::log(L)) / L;
}

double phi2_remainder_envelope(double t, double r, double a) {
  return 1.0 / ((1.0 + t + r) * std::pow(1.0 + std::abs(r - t), a));
}

double flux_remainder_envelope(double t, double r, double a) {
  return std::pow(1.0 + pos_part(t - r), a) / std::pow(1.0 + t + r, 1.0 + a);
}

double cone_source_envelope(double t, double r, double delta) {
  return s0_envelope(t, r) / ((1.0 + t + r) * std::pow(1.0 + pos_part(r - t), delta));
}

double cone_source(double t, double r, double delta) {
  return 1.0 / ((1.0 + r) * (1.0 + t + r) * std::pow(1.0 + std::abs(t - r), 1.0 + delta));
}

}  // namespace nulllab
