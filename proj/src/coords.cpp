#include "nulllab/coords.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>

#include "nulllab/cutoffs.hpp"

namespace nulllab {

RStarVariant parse_variant(const std::string& name) {
  if (name == "log-r") return RStarVariant::LogR;
  if (name == "log-1+r" || name == "log-(1+r)") return RStarVariant::LogOnePlusR;
  if (name == "regge-wheeler") return RStarVariant::ReggeWheeler;
  throw DomainError("unknown r* variant '" + name + "'");
}

std::string variant_name(RStarVariant v) {
  switch (v) {
    case RStarVariant::LogR: return "log-r";
    case RStarVariant::LogOnePlusR: return "log-1+r";
    case RStarVariant::ReggeWheeler: return "regge-wheeler";
  }
  return "?";
}

double rw_rho(double r, double M) {
  if (M == 0.0) return r;
  if (!(r >= M)) throw DomainError("rw_rho: requires r >= M");
  const double s = std::sqrt((r - M) * (r + M));
  return s + M * std::log(0.5 * (r + s));
}

double rw_rho_prime(double r, double M) {
  if (!(r > M)) throw DomainError("rw_rho_prime: requires r > M");
  return std::sqrt((r + M) / (r - M));
}

double rw_rho_inverse(double rho, double M) {
  if (M == 0.0) return rho;
  const double lo = std::abs(M);
  if (!(rho > rw_rho(lo, M))) throw DomainError("rw_rho_inverse: value below rho(M)");
  double hi = std::max(2.0 * lo, rho + 2.0 * std::abs(M) * (1.0 + std::abs(std::log(std::abs(rho) + 2.0))) + 1.0);
  while (rw_rho(hi, M) < rho) hi *= 2.0;
  std::uintmax_t iters = 200;
  const double guess = std::clamp(rho - M * std::log1p(std::abs(rho)), lo * (1.0 + 1e-12), hi);
  const double r = boost::math::tools::newton_raphson_iterate(
      [&](double x) {
        if (x <= lo) x = lo * (1.0 + 1e-15);
        return std::make_pair(rw_rho(x, M) - rho, rw_rho_prime(x, M));
      },
      guess, lo * (1.0 + 1e-15), hi, 52, iters);
  if (iters >= 200) throw NumericalError("rw_rho_inverse: Newton did not converge");
  return r;
}

namespace {

void check_time(double t) {
  if (!(t > -1.0)) throw DomainError("r*: requires t > -1");
}

}  // namespace

KappaTerms kappa_terms(double r, double t, const CoordParams& p) {
  if (!(r > 0.0)) throw DomainError("kappa_terms: requires r > 0");
  KappaTerms k;
  if (p.variant == RStarVariant::ReggeWheeler) {
    k.kappa = rw_rho(r, p.mass) - r;
    k.kappa_r = rw_rho_prime(r, p.mass) - 1.0;
    k.kappa_t = 0.0;
  } else {
    check_time(t);
    const double T = 1.0 + t;
    const double s = r / T;
    const double c = chi_tilde(s);
    const double cd = chi_tilde_d1(s);
    const bool logr = p.variant == RStarVariant::LogR;
    const double ell = logr ? std::log(r) : std::log1p(r);
    const double ell_d = logr ? 1.0 / r : 1.0 / (1.0 + r);
    if (c != 0.0 || cd != 0.0) {
      k.kappa = p.mass * c * ell;
      k.kappa_r = p.mass * (cd * ell / T + c * ell_d);
      k.kappa_t = -p.mass * cd * ell * r / (T * T);
    }
  }
  k.a = 1.0 + k.kappa_r;
  k.b = 1.0 + k.kappa / r;
  return k;
}

double rstar(double r, double t, const CoordParams& p) {
  if (r < 0.0) throw DomainError("rstar: requires r >= 0");
  if (p.variant == RStarVariant::ReggeWheeler) return rw_rho(r, p.mass);
  check_time(t);
  if (r == 0.0) return 0.0;
  return r + kappa_terms(r, t, p).kappa;
}

double rstar_inverse(double rs, double t, const CoordParams& p) {
  if (p.variant == RStarVariant::ReggeWheeler) return rw_rho_inverse(rs, p.mass);
  check_time(t);
  if (!(rs > 0.0)) throw DomainError("rstar_inverse: value at or below the infimum 0");
  double hi = rs + 2.0 * std::abs(p.mass) * (1.0 + std::log1p(rs)) + 1.0;
  while (rstar(hi, t, p) < rs) hi *= 2.0;
  std::uintmax_t iters = 200;
  const double guess = std::clamp(rs - p.mass * std::log1p(rs), 0.5 * rs, hi);
  const double r = boost::math::tools::newton_raphson_iterate(
      [&](double x) {
        if (x <= 0.0) return std::make_pair(-rs, 1.0);
        const KappaTerms k = kappa_terms(x, t, p);
        return std::make_pair(x + k.kappa - rs, k.a);
      },
      guess, 0.0, hi, 52, iters);
  if (iters >= 200) throw NumericalError("rstar_inverse: Newton did not converge");
  return r;
}

Vec3 to_starred(const Vec3& x, double t, const CoordParams& p) {
  const double r = x.norm();
  if (!(r > 0.0)) throw DomainError("to_starred: requires r > 0");
  return x * (rstar(r, t, p) / r);
}

Mat3 jacobian(const Vec3& x, double t, const CoordParams& p) {
  const double r = x.norm();
  const KappaTerms k = kappa_terms(r, t, p);
  const Vec3 w = x / r;
  return Mat3::Identity() * k.b + (w * w.transpose()) * (k.kappa_r - k.kappa / r);
}

double jacobian_det(const Vec3& x, double t, const CoordParams& p) {
  const KappaTerms k = kappa_terms(x.norm(), t, p);
  return k.b * k.b * k.a;
}

namespace {

void check_stencil(const SampledField& phi, double t, const Vec3& x, double reach) {
  const double r = x.norm();
  if (t - reach < phi.t_min || t + reach > phi.t_max)
    throw DomainError("stencil leaves the time range of the field");
  if (r - reach <= std::max(phi.r_min, 0.0) || r + reach > phi.r_max)
    throw DomainError("stencil leaves the radial range of the field or reaches r = 0");
}

double d2(const std::function<double(double)>& g, double h) {
  return (-g(2 * h) + 16.0 * g(h) - 30.0 * g(0.0) + 16.0 * g(-h) - g(-2 * h)) / (12.0 * h * h);
}

double d1(const std::function<double(double)>& g, double h) {
  return (-g(2 * h) + 8.0 * g(h) - 8.0 * g(-h) + g(-2 * h)) / (12.0 * h);
}

double flat_parts(const ScalarField& f, double t, const Vec3& x, double h, double& dtt) {
  dtt = d2([&](double e) { return f(t + e, x); }, h);
  double lap = 0.0;
  for (int i = 0; i < 3; ++i) {
    lap += d2([&](double e) { return f(t, x + e * Vec3::Unit(i)); }, h);
  }
  return lap;
}

}  // namespace

double apply_box0(const SampledField& phi, double t, const Vec3& x, double mass, double h) {
  check_stencil(phi, t, x, 2.0 * h);
  check_time(t);
  const double r = x.norm();
  const double c0 = mass * chi_tilde(r / (1.0 + t)) / r;
  double dtt = 0.0;
  const double lap = flat_parts(phi.f, t, x, h, dtt);
  return -(1.0 + c0) * dtt + (1.0 - c0) * lap;
}

double apply_boxstar(const SampledField& phi_star, double t, const Vec3& xs, double h) {
  check_stencil(phi_star, t, xs, 2.0 * h);
  double dtt = 0.0;
  const double lap = flat_parts(phi_star.f, t, xs, h, dtt);
  return -dtt + lap;
}

double n_weight(double r, double q, double mass) {
  return 1.0 + mass * std::log1p(r) / (1.0 + std::abs(q));
}

std::string VectorFieldSpec::name() const {
  switch (kind) {
    case VFKind::Partial: return "d" + std::to_string(i);
    case VFKind::Rotation: return "Omega" + std::to_string(i) + std::to_string(j);
    case VFKind::Boost: return "B" + std::to_string(i);
    case VFKind::Scaling: return "S";
  }
  return "?";
}

std::vector<VectorFieldSpec> vector_field_family() {
  std::vector<VectorFieldSpec> out;
  for (int m = 0; m < 4; ++m) out.push_back({VFKind::Partial, m, 0});
  out.push_back({VFKind::Rotation, 1, 2});
  out.push_back({VFKind::Rotation, 1, 3});
  out.push_back({VFKind::Rotation, 2, 3});
  for (int i = 1; i <= 3; ++i) out.push_back({VFKind::Boost, i, 0});
  out.push_back({VFKind::Scaling, 0, 0});
  return out;
}

Vec4 vf_coefficients(const VectorFieldSpec& z, double t, const Vec3& x) {
  Vec4 c = Vec4::Zero();
  switch (z.kind) {
    case VFKind::Partial:
      c(z.i) = 1.0;
      break;
    case VFKind::Rotation:
      c(z.j) = x(z.i - 1);
      c(z.i) = -x(z.j - 1);
      break;
    case VFKind::Boost:
      c(z.i) = t;
      c(0) = x(z.i - 1);
      break;
    case VFKind::Scaling:
      c << t, x.x(), x.y(), x.z();
      break;
  }
  return c;
}

Vec4 gradient4(const ScalarField& phi, double t, const Vec3& x, double h) {
  Vec4 g;
  g(0) = d1([&](double e) { return phi(t + e, x); }, h);
  for (int i = 0; i < 3; ++i) g(i + 1) = d1([&](double e) { return phi(t, x + e * Vec3::Unit(i)); }, h);
  return g;
}

double apply_vector_field(const VectorFieldSpec& z, const ScalarField& phi, double t,
                          const Vec3& x, double h) {
  return vf_coefficients(z, t, x).dot(gradient4(phi, t, x, h));
}

}  // namespace nulllab

namespace nulllab {

OperatorComparison compare_box_operators(const ScalarField& phi_star, double t, const Vec3& x,
                                         const CoordParams& p, double h) {
  const ScalarField phi = [&](double tt, const Vec3& xx) {
    return phi_star(tt, to_starred(xx, tt, p));
  };
  OperatorComparison c;
  c.box0 = apply_box0(SampledField{phi}, t, x, p.mass, h);
  c.boxstar = apply_boxstar(SampledField{phi_star}, t, to_starred(x, t, p), h);
  c.difference = std::abs(c.boxstar - c.box0);

  double largest = gradient4(phi, t, x, h).norm();
  for (const auto& z : vector_field_family()) {
    const ScalarField zphi = [&](double tt, const Vec3& xx) {
      return apply_vector_field(z, phi, tt, xx, h);
    };
    largest = std::max(largest, gradient4(zphi, t, x, h).norm());
  }
  const double r = x.norm();
  c.envelope = p.mass * std::log1p(r) / std::pow(1.0 + t + r, 2) * largest;
  c.ratio = c.envelope > 0.0 ? c.difference / c.envelope : 0.0;
  return c;
}

}  // namespace nulllab
