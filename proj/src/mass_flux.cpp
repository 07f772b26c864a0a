#include "nulllab/mass_flux.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nulllab/cutoffs.hpp"

namespace nulllab {

namespace {

/// int_lo^hi f with cuts at 0, +-2^k and lo + 2^k so narrow features stay visible.
QuadResult integrate_cut(const Fn1& f, double lo, double hi, double tol) {
  QuadResult res;
  if (!(hi > lo)) return res;
  std::vector<double> cuts{lo, hi};
  for (double c = 1.0; c < 1e300; c *= 2.0) {
    if (c > std::max(std::abs(lo), std::abs(hi))) break;
    for (double s : {-c, c}) {
      if (s > lo && s < hi) cuts.push_back(s);
    }
  }
  if (lo < 0.0 && hi > 0.0) cuts.push_back(0.0);
  for (double d = 1.0; lo + d < hi; d *= 2.0) cuts.push_back(lo + d);
  std::sort(cuts.begin(), cuts.end());
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (!(cuts[k + 1] > cuts[k])) continue;
    const QuadResult piece = integrate(f, cuts[k], cuts[k + 1], tol, 18, 1e-17);
    res.value += piece.value;
    res.error += piece.error;
  }
  return res;
}

/// K(a) including the a = 0 endpoint value 2.
double kernel_value(double a) {
  if (a == 0.0) return 2.0;
  if (a > 8.0) {
    // int_0^2 w^2/(a+w) dw = sum_k (-1)^k 2^{k+3} / ((k+3) a^{k+1})
    double sum = 0.0, term = 8.0 / a;
    for (int k = 0; k < 60; ++k) {
      sum += term / (k + 3);
      term *= -2.0 / a;
    }
    return sum;
  }
  return 2.0 - 2.0 * a + a * a * std::log1p(2.0 / a);
}

double cubic_lagrange(const std::vector<double>& x, const std::vector<double>& y, double t) {
  const size_t n = x.size();
  if (n == 1) return y[0];
  size_t k = std::upper_bound(x.begin(), x.end(), t) - x.begin();
  k = k == 0 ? 0 : k - 1;
  const size_t m = std::min<size_t>(4, n);
  size_t start = k >= 1 ? k - 1 : 0;
  start = std::min(start, n - m);
  double v = 0.0;
  for (size_t i = start; i < start + m; ++i) {
    double l = 1.0;
    for (size_t j = start; j < start + m; ++j) {
      if (j != i) l *= (t - x[j]) / (x[i] - x[j]);
    }
    v += l * y[i];
  }
  return v;
}

/// Decay exponent a from log sup_omega n against log <q> on |q| >= 2.
double fit_decay(const std::vector<double>& q, const std::vector<double>& sup_n) {
  std::vector<double> lx, ly;
  for (size_t k = 0; k < q.size(); ++k) {
    if (std::abs(q[k]) >= 2.0 && sup_n[k] > 1e-300) {
      lx.push_back(std::log(jbracket(q[k])));
      ly.push_back(std::log(sup_n[k]));
    }
  }
  if (lx.size() < 3) return kMaxDecay;
  double mx = 0.0, my = 0.0;
  for (size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= lx.size();
  my /= lx.size();
  double num = 0.0, den = 0.0;
  for (size_t k = 0; k < lx.size(); ++k) {
    num += (lx[k] - mx) * (ly[k] - my);
    den += (lx[k] - mx) * (lx[k] - mx);
  }
  if (!(den > 0.0)) return kMaxDecay;
  return std::min(kMaxDecay, -num / den - 1.0);
}

}  // namespace

std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) throw DomainError("uniform_grid: need n >= 2 and hi > lo");
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) g[k] = lo + (hi - lo) * k / (n - 1);
  return g;
}

TangentialRadiationData diagonal_radiation_data(const std::vector<double>& q, const SphereRule& sphere, const Fn1& v) {
  TangentialRadiationData d;
  d.q = q;
  d.sphere = sphere;
  d.v.reserve(q.size() * sphere.nodes.size());
  for (double qq : q) {
    const double val = v(qq);
    for (size_t s = 0; s < sphere.nodes.size(); ++s) d.v.push_back({val, 0.0, -val});
  }
  return d;
}

GridSource compute_n(const TangentialRadiationData& data) {
  const size_t nq = data.q.size(), ns = data.sphere.nodes.size();
  if (nq == 0 || ns == 0) throw ValidationError("compute_n: empty grid");
  if (data.v.size() != nq * ns) throw ValidationError("compute_n: V has the wrong size");
  if (!data.v_lt.empty() && data.v_lt.size() != nq * ns) throw ValidationError("compute_n: V_LT has the wrong size");
  if (!std::is_sorted(data.q.begin(), data.q.end())) throw ValidationError("compute_n: q grid must be increasing");
  double worst = 0.0;
  size_t worst_iq = 0, worst_is = 0;
  const char* worst_kind = "trace";
  for (size_t iq = 0; iq < nq; ++iq) {
    for (size_t is = 0; is < ns; ++is) {
      const auto& v = data.v[data.index(iq, is)];
      const double tr = std::abs(v[0] + v[2]);
      if (tr > worst) {
        worst = tr;
        worst_iq = iq;
        worst_is = is;
        worst_kind = "trace";
      }
      if (!data.v_lt.empty()) {
        const auto& l = data.v_lt[data.index(iq, is)];
        const double m = std::max({std::abs(l[0]), std::abs(l[1]), std::abs(l[2])});
        if (m > worst) {
          worst = m;
          worst_iq = iq;
          worst_is = is;
          worst_kind = "V_LT";
        }
      }
    }
  }
  if (worst > kConstraintTol) {
    const Vec3& w = data.sphere.nodes[worst_is];
    std::ostringstream msg;
    msg << "compute_n: " << worst_kind << " constraint violated by " << worst << " at q = " << data.q[worst_iq]
        << ", omega = (" << w.x() << ", " << w.y() << ", " << w.z() << ")";
    throw ValidationError(msg.str());
  }
  GridSource g;
  g.q = data.q;
  g.sphere = data.sphere;
  g.n.resize(nq * ns);
  std::vector<double> sup_n(nq, 0.0);
  for (size_t iq = 0; iq < nq; ++iq) {
    for (size_t is = 0; is < ns; ++is) {
      const auto& v = data.v[data.index(iq, is)];
      const double n = 0.5 * (v[0] * v[0] + 2.0 * v[1] * v[1] + v[2] * v[2]);
      g.n[data.index(iq, is)] = n;
      sup_n[iq] = std::max(sup_n[iq], n);
    }
  }
  g.a = fit_decay(g.q, sup_n);
  return g;
}

double radiation_decay_constant(const TangentialRadiationData& data, double eps, double gamma_prime) {
  if (!(eps > 0.0)) throw DomainError("radiation_decay_constant: eps must be positive");
  const size_t ns = data.sphere.nodes.size();
  double c = 0.0;
  for (size_t iq = 0; iq < data.q.size(); ++iq) {
    const double q = data.q[iq];
    const double w = jbracket(q) * std::pow(1.0 + pos_part(q), gamma_prime) / eps;
    for (size_t is = 0; is < ns; ++is) {
      const auto& v = data.v[data.index(iq, is)];
      c = std::max(c, w * std::sqrt(v[0] * v[0] + 2.0 * v[1] * v[1] + v[2] * v[2]));
    }
  }
  return c;
}

EnergyProfile energy_profile(const SourceProfile& n, int n_theta, int n_phi) {
  EnergyProfile e;
  e.a = n.a;
  if (n.spherical) {
    auto f = n.n;
    e.E = [f](double q) { return 0.5 * f(q, Vec3::UnitZ()); };
    return e;
  }
  const SphereRule rule = sphere_rule(n_theta, n_phi);
  auto f = n.n;
  e.E = [f, rule](double q) {
    double s = 0.0;
    for (size_t k = 0; k < rule.nodes.size(); ++k) s += rule.weights[k] * f(q, rule.nodes[k]);
    return 0.5 * s;
  };
  return e;
}

EnergyProfile energy_profile(const GridSource& g) {
  const size_t nq = g.q.size(), ns = g.sphere.nodes.size();
  if (nq == 0 || g.n.size() != nq * ns) throw ValidationError("energy_profile: inconsistent grid source");
  std::vector<double> ev(nq, 0.0);
  for (size_t iq = 0; iq < nq; ++iq) {
    double s = 0.0;
    for (size_t is = 0; is < ns; ++is) s += g.sphere.weights[is] * g.n[iq * ns + is];
    ev[iq] = 0.5 * s;
  }
  EnergyProfile e;
  e.a = g.a;
  e.q_min = g.q.front();
  e.q_max = g.q.back();
  e.nodes = g.q;
  const std::vector<double> qs = g.q;
  e.E = [qs, ev](double q) {
    if (q < qs.front() || q > qs.back()) return 0.0;
    return cubic_lagrange(qs, ev, q);
  };
  return e;
}

MassResult mass_from_flux(const EnergyProfile& e) {
  if (!e.E) throw DomainError("mass_from_flux: empty profile");
  if (!(e.a > 0.0)) throw DomainError("mass_from_flux: n is not integrable (a <= 0)");
  MassResult res;
  const double tol = 1e-12;
  auto tail_weight = [&](double lo, double hi) {
    // int over [lo, hi] of <q>^{-1-a}; hi may be infinite
    const Fn1 w = [&](double q) { return std::pow(1.0 + q * q, -0.5 * (1.0 + e.a)); };
    if (std::isinf(hi)) return integrate_to_infinity(w, lo, 1e-10, false).value;
    return integrate_cut(w, lo, hi, 1e-10).value;
  };
  auto envelope_constant = [&](double lo, double hi) {
    double c = 0.0;
    for (int k = 0; k <= 64; ++k) {
      const double q = lo + (hi - lo) * k / 64.0;
      c = std::max(c, std::abs(e.E(q)) * std::pow(1.0 + q * q, 0.5 * (1.0 + e.a)));
    }
    return c;
  };
  if (!e.nodes.empty()) {
    // Piecewise cubic data: Gauss-Kronrod is exact on each grid interval.
    for (size_t k = 0; k + 1 < e.nodes.size(); ++k) {
      const QuadResult piece = integrate(e.E, e.nodes[k], e.nodes[k + 1], tol, 4, 1e-17);
      res.value += piece.value;
      res.error += piece.error;
    }
    const double span = e.q_max - e.q_min;
    const double c_lo = envelope_constant(e.q_min, e.q_min + 0.1 * span);
    const double c_hi = envelope_constant(e.q_max - 0.1 * span, e.q_max);
    res.tail_bound = c_lo * tail_weight(-e.q_min, std::numeric_limits<double>::infinity()) +
                     c_hi * tail_weight(e.q_max, std::numeric_limits<double>::infinity());
    res.cutoff = std::max(std::abs(e.q_min), std::abs(e.q_max));
  } else {
    double Q = 16.0;
    for (;;) {
      const QuadResult core = integrate_cut(e.E, -Q, Q, tol);
      const double c = std::max(envelope_constant(0.5 * Q, Q), envelope_constant(-Q, -0.5 * Q));
      res.value = core.value;
      res.error = core.error;
      res.cutoff = Q;
      res.tail_bound = 2.0 * c * tail_weight(Q, std::numeric_limits<double>::infinity());
      if (res.tail_bound < 1e-10 * std::abs(res.value) || res.tail_bound == 0.0 || Q > 1e14) break;
      Q *= 4.0;
    }
  }
  res.error += res.tail_bound;
  res.precision_warning = res.tail_bound > 1e-8 * std::abs(res.value);
  return res;
}

MassResult mass_from_flux(const SourceProfile& n) { return mass_from_flux(energy_profile(n)); }

double kll_kernel(double a) {
  if (!(a > 0.0)) throw DomainError("kll_kernel: requires a > 0");
  return kernel_value(a);
}

namespace {

void check_cone_args(double qstar, double rstar) {
  if (!(rstar > 0.0)) throw DomainError("kll: requires r* > 0");
  if (!(rstar - qstar > 0.0)) throw DomainError("kll: requires t = r* - q* > 0");
}

double cutoff_top(double t, double rstar) {
  const double c = 0.75 * (t + rstar);
  return std::sqrt(std::max(0.0, c * c - 1.0));
}

}  // namespace

QuadResult kll_average(const SourceProfile& n, double qstar, double rstar) {
  check_cone_args(qstar, rstar);
  const double t = rstar - qstar;
  const EnergyProfile e = energy_profile(n);
  const auto f = [&](double rho) {
    return kernel_value((rho - qstar) / rstar) * e.E(rho) * chi_bump(jbracket(rho) / (t + rstar));
  };
  return integrate_cut(f, qstar, cutoff_top(t, rstar), 1e-11);
}

double kll_integrand_direct(const SourceProfile& n, double rho, double a, const Vec3& omega, int n_mu, int n_phi) {
  if (!(a >= 0.0)) throw DomainError("kll_integrand_direct: requires a >= 0");
  const Vec3 om = omega.normalized();
  Vec3 e1, e2;
  orthonormal_complement(om, e1, e2);
  const GaussRule& g = gauss_legendre(n_mu);
  double s = 0.0;
  for (int i = 0; i < n_mu; ++i) {
    const double mu = g.x[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    const double k = (1.0 - mu) * (1.0 - mu) / (a + 1.0 - mu);
    double ring = 0.0;
    for (int j = 0; j < n_phi; ++j) {
      const double ph = 2.0 * M_PI * (j + 0.5) / n_phi;
      ring += n.n(rho, mu * om + st * (std::cos(ph) * e1 + std::sin(ph) * e2));
    }
    s += 0.5 * g.w[i] * k * ring / n_phi;
  }
  return s;
}

QuadResult kll_pointwise(const SourceProfile& n, double qstar, double rstar, const Vec3& omega) {
  check_cone_args(qstar, rstar);
  const double t = rstar - qstar;
  const auto f = [&](double rho) {
    return kll_integrand_direct(n, rho, (rho - qstar) / rstar, omega) * chi_bump(jbracket(rho) / (t + rstar));
  };
  return integrate_cut(f, qstar, cutoff_top(t, rstar), 1e-10);
}

ClosureCheck mass_closure(const SourceProfile& n, double qstar, double rstar, double gamma_prime) {
  ClosureCheck c;
  c.mass = mass_from_flux(n).value;
  c.kll = kll_average(n, qstar, rstar).value;
  c.discrepancy = std::abs(c.kll - 2.0 * c.mass);
  c.bound = 2.0 * (std::abs(qstar) / rstar + std::pow(1.0 + std::abs(qstar), -gamma_prime)) * std::abs(c.mass);
  c.pass = c.discrepancy <= c.bound;
  return c;
}

}  // namespace nulllab
