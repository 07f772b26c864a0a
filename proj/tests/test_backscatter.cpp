#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "nulllab/backscatter.hpp"
#include "nulllab/cutoffs.hpp"

using namespace nulllab;

namespace {

using boost::math::quadrature::gauss_kronrod;

/// Radial Duhamel formula: psi = (1/2r) int_0^t ds int_{|r-(t-s)|}^{r+t-s} rho F(s, rho) drho.
double duhamel_radial(const std::function<double(double, double)>& F, double t, double r) {
  auto inner = [&](double s) {
    const double tau = t - s;
    return gauss_kronrod<double, 31>::integrate([&](double rho) { return rho * F(s, rho); }, std::abs(r - tau),
                                                r + tau, 12, 1e-12);
  };
  return gauss_kronrod<double, 31>::integrate(inner, 0.0, t, 12, 1e-11) / (2.0 * r);
}

std::function<double(double, double)> radial_source(const SourceProfile& n) {
  return [n](double s, double rho) { return rho > 0.0 ? eval_source(n, s, Vec3(0, 0, rho)) : 0.0; };
}

SourceProfile zero_profile() {
  SourceProfile z;
  z.n = [](double, const Vec3&) { return 0.0; };
  z.spherical = true;
  return z;
}

}  // namespace

TEST(Source, ValuesAndSupport) {
  const auto n = bracket_power_profile(2.0);
  EXPECT_NEAR(eval_source(n, 10.0, Vec3(0, 10, 0)), 0.01, 1e-15);
  EXPECT_EQ(eval_source(n, 100.0, Vec3(10, 0, 0)), 0.0);
  EXPECT_EQ(eval_source(zero_profile(), 5.0, Vec3(5, 0, 0)), 0.0);
  EXPECT_THROW(eval_source(n, 1.0, Vec3::Zero()), DomainError);
}

TEST(Source, ProfileCheckReportsConstant) {
  const auto c = check_profile(bracket_power_profile(2.0), 2);
  EXPECT_GT(c.constant, 1.0);
  EXPECT_LT(c.constant, 10.0);
  const auto tilted = check_profile(tilted_profile(2.0, 0.3), 2);
  EXPECT_GT(tilted.constant, c.constant);
  EXPECT_LT(tilted.constant, 20.0);
}

TEST(RetardedGeometry, InequalitiesHoldOnRandomPoints) {
  CounterRng rng(2024);
  int checked = 0;
  for (int k = 0; k < 100000; ++k) {
    const double t = rng.uniform(0.0, 200.0);
    const Vec3 x = rng.unit_vector() * rng.uniform(0.0, 200.0);
    const double q = rng.uniform(x.norm() - t, x.norm() + t + 50.0);
    const Vec3 w = rng.unit_vector();
    if (t + q - x.dot(w) <= 0.0) continue;
    ++checked;
    ASSERT_TRUE(retarded_inequalities_hold(t, x, q, w)) << t << " " << x.transpose() << " " << q;
  }
  EXPECT_GT(checked, 99000);
}

TEST(Kernels, ZeroProfileAndCutoff) {
  const auto z = zero_profile();
  const auto n = bracket_power_profile(2.0);
  EXPECT_EQ(phi1(z, 10.0, 5.0, Vec3::UnitZ()).value, 0.0);
  EXPECT_EQ(phi1_plus(z, 10.0, 5.0, Vec3::UnitZ()).value, 0.0);
  EXPECT_EQ(phi_exact(z, 10.0, Vec3(5, 0, 0)).value, 0.0);
  EXPECT_EQ(phi2(z, 10.0, Vec3(5, 0, 0)).value, 0.0);
  // r - t >= 3/4 (t + r): outside the cutoff.
  EXPECT_EQ(phi1(n, 1.0, 20.0, Vec3::UnitZ()).value, 0.0);
  EXPECT_EQ(phi1_plus(n, 1.0, 20.0, Vec3::UnitZ()).value, 0.0);
  EXPECT_THROW(phi1(n, 1.0, 0.0, Vec3::UnitZ()), DomainError);
}

TEST(Kernels, FluxOfGaussian) {
  const auto n = gaussian_profile(2.0);
  const double t = 1000.0, r = 400.0;
  EXPECT_EQ(chi_bump(std::sqrt(1.0 + 600.0 * 600.0) / (t + r)), 1.0);
  EXPECT_NEAR(phi1_plus(n, t, r, Vec3::UnitX()).value, std::sqrt(M_PI / 2.0) / (2.0 * r), 1e-14);
}

TEST(Kernels, FluxMatchesOutgoingDerivativeOfPhi1) {
  const auto n = bracket_power_profile(2.0);
  const double a = 1.0, h = 1e-3;
  double worst = 0.0;
  for (double t : {20.0, 50.0, 100.0})
    for (double ratio : {0.8, 0.95, 1.0, 1.05, 1.2}) {
      const double r = ratio * t;
      auto rphi = [&](double tt, double rr) { return rr * phi1(n, tt, rr, Vec3::UnitZ()).value; };
      const double d = (rphi(t + h, r + h) - rphi(t - h, r - h)) / (2.0 * h);
      const double diff = std::abs(d - phi1_plus(n, t, r, Vec3::UnitZ()).value);
      worst = std::max(worst, diff / flux_remainder_envelope(t, r, a));
    }
  EXPECT_LT(worst, 20.0);
}

TEST(PhiExact, MatchesRadialDuhamel) {
  const auto n = bracket_power_profile(2.0);
  const auto F = radial_source(n);
  for (auto [t, r] : {std::pair{10.0, 3.0}, {10.0, 9.5}, {10.0, 14.0}, {30.0, 30.0}, {25.0, 5.0}}) {
    const double exact = phi_exact(n, t, Vec3(0, r, 0)).value;
    const double ref = duhamel_radial(F, t, r);
    EXPECT_NEAR(exact, ref, 1e-8 * std::abs(ref)) << t << " " << r;
  }
}

TEST(PhiExact, OriginReduction) {
  const auto n = bracket_power_profile(2.0);
  const double at0 = phi_exact(n, 20.0, Vec3::Zero()).value;
  EXPECT_NEAR(phi_exact(n, 20.0, Vec3(1e-4, 0, 0)).value, at0, 1e-6 * at0);
  EXPECT_NEAR(phi2(n, 20.0, Vec3::Zero()).value, at0, 1e-14 * at0);
  EXPECT_NEAR(at0, duhamel_radial(radial_source(n), 20.0, 1e-3), 1e-5 * at0);
}

TEST(PhiExact, AngularProfileParity) {
  // (1 + beta omega_3): the omega_3 part flips under x -> -x, so the even part is the radial solution.
  const auto tilted = tilted_profile(2.0, 0.4);
  const auto radial = bracket_power_profile(2.0);
  const Vec3 x(1.0, 2.0, 6.0);
  const double t = 12.0;
  const double plus = phi_exact(tilted, t, x).value;
  const double minus = phi_exact(tilted, t, -x).value;
  const double ref = phi_exact(radial, t, x).value;
  EXPECT_NEAR(0.5 * (plus + minus), ref, 1e-7 * ref);
  EXPECT_GT(plus, minus);
}

TEST(PhiExact, SolvesWaveEquation) {
  const auto n = bracket_power_profile(2.0);
  const double t = 12.0, r = 7.0;
  auto phi = [&](double tt, double rr) { return phi_exact(n, tt, Vec3(0, 0, rr)).value; };
  std::vector<double> res;
  for (double h : {0.4, 0.2, 0.1}) {
    const double c = phi(t, r);
    const double tt = (phi(t + h, r) - 2 * c + phi(t - h, r)) / (h * h);
    const double rr = (phi(t, r + h) - 2 * c + phi(t, r - h)) / (h * h);
    const double dr = (phi(t, r + h) - phi(t, r - h)) / (2 * h);
    res.push_back(std::abs(tt - rr - 2.0 * dr / r - eval_source(n, t, Vec3(0, 0, r))));
  }
  EXPECT_GT(std::log2(res[0] / res[1]), 1.9);
  EXPECT_GT(std::log2(res[1] / res[2]), 1.9);
}

TEST(Phi2, RemainderEnvelopeAtReferencePoint) {
  const auto n = bracket_power_profile(2.0);
  const double t = 40.0, r = 10.0;
  const double d = std::abs(phi_exact(n, t, Vec3(r, 0, 0)).value - phi2(n, t, Vec3(r, 0, 0)).value);
  const double c = d / phi2_remainder_envelope(t, r, 0.9);
  RecordProperty("phi2_remainder_constant", std::to_string(c));
  EXPECT_LT(c, 20.0);
}

TEST(Phi2, RadialHomogeneityInside) {
  const auto n = gaussian_profile(1.0);
  for (double t : {200.0, 400.0}) {
    const Vec3 x(0.0, 0.3 * t, 0.0);
    const double a = phi2(n, t, x).value;
    const double b = phi2(n, 2.0 * t, 2.0 * x).value;
    EXPECT_NEAR(2.0 * b / a, 1.0, 1e-3) << t;
  }
}

TEST(S0, ValuesAndLimits) {
  EXPECT_EQ(s0_envelope(0.0, 3.0), 0.0);
  EXPECT_NEAR(s0_envelope(1.0, 1.0), std::log(std::sqrt(5.0)), 1e-15);
  EXPECT_NEAR(s0_envelope(1.0, 1.0), 0.804719, 1e-6);
  EXPECT_NEAR(s0_envelope(3.0, 1e-9), s0_envelope(3.0, 0.0), 1e-8);
  EXPECT_NEAR(s0_envelope(3.0, 0.0), 18.0 / 10.0, 1e-15);
  double prev = 0.0;
  const double q = -2.0;
  for (double r = 10.0; r < 1e7; r *= 3.0) {
    const double v = s0_envelope(r - q, r);
    EXPECT_GT(v, prev);
    EXPECT_NEAR(v / std::log(2.0 * r / jbracket(q)), 1.0, 2.0 / std::log(r));
    prev = v;
  }
}

TEST(LogKernel, MeasuredConstantsStayBelowTwenty) {
  for (double b : {0.5, 1.0, 1.5}) {
    const Fn1 m = [b](double q) { return std::pow(1.0 + q * q, -0.5 * (1.0 + b)); };
    double worst = 0.0;
    for (double t : {10.0, 100.0, 1000.0})
      for (double ratio : {0.1, 0.5, 0.9, 0.99, 1.0, 1.01, 1.1, 2.0, 10.0}) {
        const double r = ratio * t;
        worst = std::max(worst, std::abs(log_kernel_integral(m, t, r).value) / log_kernel_envelope(t, r, b));
      }
    RecordProperty("log_kernel_b" + std::to_string(b), std::to_string(worst));
    EXPECT_LT(worst, 20.0) << "b = " << b;
  }
}

TEST(Kernels, Phi1ApproximatesPhiExactNearCone) {
  const auto n = bracket_power_profile(2.0);
  const double t = 100.0, r = 90.0, a = 1.0;
  const double d = std::abs(phi_exact(n, t, Vec3(0, 0, r)).value - phi1(n, t, r, Vec3::UnitZ()).value);
  const double c = d * (1.0 + t + r) * std::pow(1.0 + pos_part(r - t), a);
  RecordProperty("phi1_constant", std::to_string(c));
  EXPECT_LT(c, 20.0);
}
