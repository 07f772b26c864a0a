#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nulllab/coords.hpp"
#include "nulllab/cutoffs.hpp"

using namespace nulllab;

namespace {

const std::vector<RStarVariant> kVariants = {RStarVariant::LogR, RStarVariant::LogOnePlusR,
                                             RStarVariant::ReggeWheeler};

/// Jacobian of x -> x* by central differences.
Mat3 fd_jacobian(const Vec3& x, double t, const CoordParams& p, double h) {
  Mat3 j;
  for (int c = 0; c < 3; ++c) {
    const Vec3 e = Vec3::Unit(c) * h;
    j.col(c) = (to_starred(x + e, t, p) - to_starred(x - e, t, p)) / (2.0 * h);
  }
  return j;
}

}  // namespace

TEST(Cutoffs, PlateausAndSupport) {
  EXPECT_EQ(chi_tilde(0.2), 0.0);
  EXPECT_EQ(chi_tilde(0.5), 1.0);
  EXPECT_EQ(chi_tilde(3.0), 1.0);
  EXPECT_GT(chi_tilde(0.3), 0.0);
  EXPECT_LT(chi_tilde(0.3), 1.0);
  EXPECT_EQ(chi_bump(0.5), 1.0);
  EXPECT_EQ(chi_bump(-0.2), 1.0);
  EXPECT_EQ(chi_bump(0.75), 0.0);
  EXPECT_EQ(chi_bump(-2.0), 0.0);
  EXPECT_EQ(chi_exterior(1.0), 0.0);
  EXPECT_EQ(chi_exterior(2.0), 1.0);
  EXPECT_NEAR(smooth_step(0.5), 0.5, 1e-15);
}

TEST(Cutoffs, DerivativeMatchesDifferences) {
  for (double s : {0.26, 0.3, 0.375, 0.44, 0.49}) {
    const double h = 1e-6;
    const double fd = (chi_tilde(s + h) - chi_tilde(s - h)) / (2 * h);
    EXPECT_NEAR(chi_tilde_d1(s), fd, 1e-6);
  }
}

TEST(Coords, KappaTermsHandValues) {
  const CoordParams p{0.1, RStarVariant::LogR};
  const KappaTerms k = kappa_terms(10.0, 1.0, p);
  EXPECT_NEAR(k.kappa, 0.1 * std::log(10.0), 1e-15);
  EXPECT_NEAR(k.kappa_r, 0.01, 1e-15);
  EXPECT_NEAR(k.a, 1.01, 1e-15);
  EXPECT_NEAR(k.b, 1.0230258509299405, 1e-15);
  EXPECT_EQ(k.kappa_t, 0.0);
}

TEST(Coords, FarFieldAndFlatLimit) {
  const CoordParams p{1e-4, RStarVariant::LogOnePlusR};
  EXPECT_NEAR(rstar(1e6, 0.0, p), 1e6 + 1e-4 * std::log1p(1e6), 1e-9);
  for (auto v : kVariants) {
    const CoordParams flat{0.0, v};
    EXPECT_EQ(rstar(3.7, 2.0, flat), 3.7);
    EXPECT_NEAR(jacobian_det(Vec3(1, 2, 3), 2.0, flat), 1.0, 1e-15);
  }
}

TEST(Coords, InverseRoundTrip) {
  CounterRng rng(42);
  for (auto v : kVariants) {
    const CoordParams p{0.05, v};
    for (int k = 0; k < 200; ++k) {
      const double t = rng.uniform(0.0, 100.0);
      const double r = std::exp(rng.uniform(std::log(0.2), std::log(1e5)));
      const double rs = rstar(r, t, p);
      EXPECT_NEAR(rstar_inverse(rs, t, p), r, 1e-12 * r) << variant_name(v);
    }
  }
  EXPECT_THROW(rstar_inverse(-1.0, 0.0, {0.05, RStarVariant::LogR}), DomainError);
  EXPECT_THROW(rstar_inverse(-10.0, 0.0, {0.05, RStarVariant::ReggeWheeler}), DomainError);
}

TEST(Coords, JacobianDeterminantIdentity) {
  CounterRng rng(42);
  for (auto v : kVariants) {
    const CoordParams p{0.05, v};
    for (int k = 0; k < 100; ++k) {
      const double t = rng.uniform(0.0, 50.0);
      const Vec3 x = rng.unit_vector() * rng.uniform(1.0, 60.0);
      const Mat3 j = jacobian(x, t, p);
      EXPECT_NEAR(j.determinant(), jacobian_det(x, t, p), 1e-12);
      EXPECT_LT((fd_jacobian(x, t, p, 1e-5) - j).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(Coords, KappaDerivativesSecondOrderDifferences) {
  // Point inside the cutoff transition so both chi~ and chi~' contribute.
  const CoordParams p{0.1, RStarVariant::LogR};
  const double t = 9.0;
  const double r = 3.7;
  const KappaTerms k = kappa_terms(r, t, p);
  auto err_r = [&](double h) {
    return std::abs((kappa_terms(r + h, t, p).kappa - kappa_terms(r - h, t, p).kappa) / (2 * h) -
                    k.kappa_r);
  };
  auto err_t = [&](double h) {
    return std::abs((kappa_terms(r, t + h, p).kappa - kappa_terms(r, t - h, p).kappa) / (2 * h) -
                    k.kappa_t);
  };
  EXPECT_GE(std::log2(err_r(1e-2) / err_r(5e-3)), 1.9);
  EXPECT_GE(std::log2(err_t(1e-2) / err_t(5e-3)), 1.9);
}

TEST(Coords, ReggeWheelerClosedForm) {
  EXPECT_NEAR(rw_rho(1e6, 1.0) - (1e6 + std::log(1e6)), 0.0, 1e-6);
  // Independent check: quadrature of rho' between two radii.
  const double M = 0.3;
  for (auto [a, b] : {std::pair{0.5, 2.0}, std::pair{2.0, 50.0}, std::pair{10.0, 1e4}}) {
    const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double r) { return std::sqrt((1 + M / r) / (1 - M / r)); }, a, b, 20, 1e-14);
    EXPECT_NEAR(rw_rho(b, M) - rw_rho(a, M), q, 1e-10 * (1 + q));
  }
  EXPECT_NEAR(rw_rho_inverse(rw_rho(7.5, M), M), 7.5, 1e-12);
  EXPECT_THROW(rw_rho_prime(0.2, M), DomainError);
}

TEST(Coords, Box0OnQuadratics) {
  const SampledField tsq{[](double t, const Vec3&) { return t * t; }};
  const SampledField xsq{[](double, const Vec3& x) { return x.squaredNorm(); }};
  // r = 10, t = 1: chi~ = 1, M/r = 0.01.
  EXPECT_NEAR(apply_box0(tsq, 1.0, Vec3(6, 8, 0), 0.1, 1e-2), -2.02, 1e-9);
  EXPECT_NEAR(apply_box0(tsq, 1.0, Vec3(6, 8, 0), 0.0, 1e-2), -2.0, 1e-9);
  EXPECT_NEAR(apply_box0(xsq, 1.0, Vec3(6, 8, 0), 0.0, 1e-2), 6.0, 1e-9);
  EXPECT_NEAR(apply_box0(xsq, 1.0, Vec3(6, 8, 0), 0.1, 1e-2), 6.0 * 0.99, 1e-9);
  EXPECT_NEAR(apply_boxstar(xsq, 1.0, Vec3(6, 8, 0), 1e-2), 6.0, 1e-9);
  EXPECT_THROW(apply_box0(xsq, 1.0, Vec3(0.01, 0, 0), 0.1, 1e-2), DomainError);
  SampledField bounded = tsq;
  bounded.t_max = 1.01;
  EXPECT_THROW(apply_box0(bounded, 1.0, Vec3(6, 8, 0), 0.1, 1e-2), DomainError);
}

TEST(Coords, VectorFieldCoefficientForms) {
  const ScalarField phi = [](double t, const Vec3& x) { return t * x.x() * x.y() + x.z(); };
  const double t = 0.7;
  const Vec3 x(1.2, -0.4, 2.0);
  auto z = [](VFKind k, int i, int j = 0) { return VectorFieldSpec{k, i, j}; };
  // Hand-derived: Omega_12 phi = x1 d2 phi - x2 d1 phi = t (x1^2 - x2^2).
  EXPECT_NEAR(apply_vector_field(z(VFKind::Rotation, 1, 2), phi, t, x, 1e-3),
              t * (x.x() * x.x() - x.y() * x.y()), 1e-10);
  // B_3 phi = t d3 phi + x3 d_t phi = t + x3 x1 x2.
  EXPECT_NEAR(apply_vector_field(z(VFKind::Boost, 3), phi, t, x, 1e-3),
              t + x.z() * x.x() * x.y(), 1e-10);
  // S phi = t d_t + x.grad: degree-3 term scales by 3, x3 by 1.
  EXPECT_NEAR(apply_vector_field(z(VFKind::Scaling, 0), phi, t, x, 1e-3),
              3 * t * x.x() * x.y() + x.z(), 1e-10);
  EXPECT_EQ(vector_field_family().size(), 11u);
}

TEST(Coords, RotationsCommuteWithStarredMap) {
  const CoordParams p{0.05, RStarVariant::LogOnePlusR};
  const ScalarField phi_star = [](double t, const Vec3& xs) {
    return std::sin(0.3 * xs.x() - 0.1 * t) * std::cos(0.2 * xs.y()) + 0.05 * xs.z() * xs.x();
  };
  const ScalarField phi = [&](double t, const Vec3& x) { return phi_star(t, to_starred(x, t, p)); };
  CounterRng rng(1);
  for (int k = 0; k < 20; ++k) {
    const double t = rng.uniform(0.0, 20.0);
    const Vec3 x = rng.unit_vector() * rng.uniform(3.0, 30.0);
    const Vec3 xs = to_starred(x, t, p);
    for (auto [i, j] : {std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 3}}) {
      const VectorFieldSpec om{VFKind::Rotation, i, j};
      EXPECT_NEAR(apply_vector_field(om, phi, t, x, 1e-3),
                  apply_vector_field(om, phi_star, t, xs, 1e-3), 1e-8);
    }
  }
}

TEST(Coords, WeightEquivalence) {
  CounterRng rng(4);
  for (auto v : {RStarVariant::LogR, RStarVariant::LogOnePlusR}) {
    const CoordParams p{0.5, v};
    for (int k = 0; k < 1000; ++k) {
      const double t = rng.uniform(0.0, 1e3);
      const double r = rng.uniform(1.0, 2e3);
      const double q = r - t;
      const double qs = rstar(r, t, p) - t;
      EXPECT_LE(1 + std::abs(qs), n_weight(r, q, p.mass) * (1 + std::abs(q)) * (1 + 1e-14));
      EXPECT_LE(1 + std::abs(q), n_weight(r, qs, p.mass) * (1 + std::abs(qs)) * (1 + 1e-14));
    }
  }
}
