#include "nulllab/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace nulllab {

namespace {

void check_converged(const QuadResult& r, double tol, const char* what) {
  if (!std::isfinite(r.value) || !std::isfinite(r.error)) {
    throw NumericalError(std::string(what) + ": non-finite quadrature result");
  }
  if (r.error > tol * std::max(1.0, std::abs(r.value)) * 1e3) {
    throw NumericalError(std::string(what) + ": error estimate " + std::to_string(r.error) +
                         " above tolerance");
  }
}

}  // namespace

namespace {

using GK15 = boost::math::quadrature::gauss_kronrod<double, 15>;

/// Bisection with a per-interval budget; the budget never drops below an absolute floor,
/// so integrands that vanish or underflow on a subinterval terminate at once.
double adapt(const Fn1& f, double a, double b, unsigned depth, double budget, double& err) {
  double e = 0.0, l1 = 0.0;
  const double est = GK15::integrate(f, a, b, 0, 0.0, &e, &l1);
  // Boost returns the non-adaptive error estimate on the reference interval [-1, 1].
  e *= 0.5 * (b - a);
  // Below ~100 eps L1 the estimate is roundoff and further bisection cannot help.
  if (depth == 0 || e <= budget || e <= 100.0 * std::numeric_limits<double>::epsilon() * l1 || !(b - a > 4.0 * std::numeric_limits<double>::epsilon() * std::abs(a))) {
    err += e;
    return est;
  }
  const double mid = 0.5 * (a + b);
  return adapt(f, a, mid, depth - 1, 0.5 * budget, err) + adapt(f, mid, b, depth - 1, 0.5 * budget, err);
}

}  // namespace

QuadResult integrate(const Fn1& f, double a, double b, double tol, unsigned max_depth, double abs_tol) {
  if (a == b) return {};
  QuadResult r;
  if (std::isinf(a) || std::isinf(b)) {
    r.value = GK15::integrate(f, a, b, max_depth, tol, &r.error);
  } else {
    double e0 = 0.0;
    const double first = GK15::integrate(f, a, b, 0, 0.0, &e0);
    const double budget = std::max({tol * std::abs(first), abs_tol, 1e-17});
    r.value = adapt(f, a, b, max_depth, budget, r.error);
  }
  check_converged(r, tol, "gauss-kronrod");
  return r;
}

QuadResult integrate_endpoint_singular(const Fn1& f, double a, double b, double tol) {
  if (a == b) return {};
  static thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
  QuadResult r;
  double l1 = 0.0;
  r.value = ts.integrate(f, a, b, tol, &r.error, &l1);
  check_converged(r, tol, "tanh-sinh");
  return r;
}

QuadResult integrate_log_left(const Fn1& f, double a, double upper, double tol, double abs_tol) {
  if (!(upper > a)) return {};
  const double near_end = std::min(upper, a + 1.0);
  const double ymax = std::log(near_end - a);
  auto g = [&](double y) {
    const double e = std::exp(y);
    return f(a + e) * e;
  };
  // Below this offset a + e rounds to a.
  const double ymin = std::log(std::max(1.0, std::abs(a)) * 1e-13);
  QuadResult r = ymax > ymin ? integrate(g, ymin, ymax, tol, 18, abs_tol) : QuadResult{};
  if (upper > near_end) {
    const QuadResult rest = integrate(f, near_end, upper, tol, 18, abs_tol);
    r.value += rest.value;
    r.error += rest.error;
  }
  return r;
}

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;
  if (n < 1) throw DomainError("gauss_legendre: order must be positive");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  auto rule = std::make_unique<GaussRule>();
  rule->x.resize(n);
  rule->w.resize(n);
  for (int k = 0; k < n; ++k) {
    rule->x[k] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    rule->w[k] = 2.0 * v0 * v0;
  }
  auto& ref = *rule;
  cache.emplace(n, std::move(rule));
  return ref;
}

SphereRule sphere_rule(int n_theta, int n_phi) {
  const GaussRule& g = gauss_legendre(n_theta);
  SphereRule s;
  s.nodes.reserve(static_cast<size_t>(n_theta) * n_phi);
  s.weights.reserve(s.nodes.capacity());
  for (int i = 0; i < n_theta; ++i) {
    const double mu = g.x[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    for (int j = 0; j < n_phi; ++j) {
      const double ph = 2.0 * M_PI * (j + 0.5) / n_phi;
      s.nodes.emplace_back(st * std::cos(ph), st * std::sin(ph), mu);
      s.weights.push_back(0.5 * g.w[i] / n_phi);
    }
  }
  return s;
}

void orthonormal_complement(const Vec3& e, Vec3& a, Vec3& b) {
  const Vec3 trial = std::abs(e.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  a = (trial - trial.dot(e) * e).normalized();
  b = e.cross(a);
}

}  // namespace nulllab
