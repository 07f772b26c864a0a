#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nulllab/coords.hpp"
#include "nulllab/eikonal.hpp"
#include "nulllab/quadrature.hpp"

using namespace nulllab;

namespace {

Point4 point(double t, const Vec3& x) { return Point4(t, x.x(), x.y(), x.z()); }

Vec4 outgoing_covector(const Vec3& omega, double rho_prime) {
  return Vec4(1.0, -rho_prime * omega.x(), -rho_prime * omega.y(), -rho_prime * omega.z());
}

/// Contravariant Lie derivative of the perturbation along the rotation in the (i, j) plane,
/// d/ds [R(-s) h(R(s) X) R(-s)^T] at s = 0, by central differences in the flow parameter.
Mat4 rotation_pullback_derivative(const MetricProvider& m, const Point4& X, int i, int j, double ds) {
  auto rot = [&](double s) {
    Mat4 R = Mat4::Identity();
    R(i, i) = std::cos(s);
    R(i, j) = -std::sin(s);
    R(j, i) = std::sin(s);
    R(j, j) = std::cos(s);
    return R;
  };
  auto pulled = [&](double s) {
    const Point4 Y = rot(s) * X;
    const Mat4 Rm = rot(-s);
    return Mat4(Rm * m.perturbation(Y).h * Rm.transpose());
  };
  return (pulled(ds) - pulled(-ds)) / (2.0 * ds);
}

double max_abs_utilde(const Trajectory& tr) {
  double u = 0.0;
  for (const auto& s : tr.states) u = std::max(u, std::abs(s.utilde));
  return u;
}

const std::vector<Vec3>& directions() {
  static const std::vector<Vec3> d{Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(0.3, -0.5, -0.8).normalized(),
                                   Vec3(-0.6, 0.7, 0.2).normalized()};
  return d;
}

}  // namespace

TEST(FVec, MinkowskiOutgoing) {
  for (const Vec3& om : directions()) {
    const Vec4 F = f_vec(minkowski(), outgoing_covector(om, 1.0));
    EXPECT_DOUBLE_EQ(F(0), 1.0);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(F(i + 1), om(i), 1e-15);
  }
}

TEST(FVec, SchwarzschildBackground) {
  const double M = 0.3;
  const MetricProvider m = schwarzschild_asymptotic(M);
  for (const Vec3& om : directions()) {
    const double r = 40.0, t = 20.0;
    const double rp = rw_rho_prime(r, M);
    const Vec4 F = f_vec(m.inverse(point(t, r * om)), outgoing_covector(om, rp));
    EXPECT_DOUBLE_EQ(F(0), 1.0);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(F(i + 1), om(i) / rp, 1e-14);
  }
}

TEST(FVec, ProjectiveInvariance) {
  const MetricProvider m = synthetic_metric("decay", 1e-4, 0.01, 0.4);
  const Point4 X = point(30.0, Vec3(10.0, 20.0, 25.0));
  const Vec4 w(1.0, -0.3, -0.5, -0.7);
  const Vec4 F = f_vec(m.inverse(X), w);
  for (double lam : {0.7, 3.0, 41.0}) {
    const Vec4 G = f_vec(m.inverse(X), lam * w);
    EXPECT_LT((G - F).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(FVec, DegenerateDenominatorThrows) {
  EXPECT_THROW(f_vec(minkowski(), Vec4(0.3, -0.3, 0.0, 0.0)), SingularityError);
  EXPECT_THROW(f_vec(minkowski(), Vec4(0.0, 1.0, 0.0, 0.0)), SingularityError);
}

TEST(HZ, ZeroWithoutPerturbation) {
  const Point4 X = point(12.0, Vec3(3.0, 9.0, 11.0));
  const Vec4 w(1.0, -0.2, -0.6, -0.77);
  for (const MetricProvider& m : {flat_metric(), schwarzschild_asymptotic(0.2)}) {
    for (ZField z : {ZField::Time, ZField::Rot12, ZField::Rot13, ZField::Rot23}) {
      EXPECT_EQ(h_z(m, X, w, z), 0.0) << zfield_name(z);
    }
  }
}

TEST(HZ, BackgroundFieldsAreKilling) {
  // With chi~ = 1 the background is static and spherically symmetric.
  const MetricProvider m = schwarzschild_asymptotic(0.2);
  const Point4 X = point(12.0, Vec3(3.0, 9.0, 11.0));
  const Vec4 w(1.0, -0.2, -0.6, -0.77);
  for (ZField z : {ZField::Time, ZField::Rot12, ZField::Rot13, ZField::Rot23}) {
    EXPECT_LT(std::abs(h_z_full(m, X, w, z)), 1e-16) << zfield_name(z);
  }
}

TEST(HZ, TimeComponentMatchesFiniteDifference) {
  for (const char* fam : {"decay", "gaussian", "violating"}) {
    const MetricProvider m = synthetic_metric(fam, 1e-4, 0.01, 0.4);
    const Point4 X = point(7.0, Vec3(2.0, -3.0, 6.5));
    const Vec4 w(1.0, -0.25, 0.4, -0.85);
    const double den = (m.inverse(X) * w)(0);
    const double exact = h_z(m, X, w, ZField::Time);
    auto fd = [&](double dt) {
      const Mat4 dh = (m.perturbation(X + Point4(dt, 0, 0, 0)).h - m.perturbation(X - Point4(dt, 0, 0, 0)).h) / (2 * dt);
      return -0.5 * w.dot(dh * w) / den;
    };
    const double e1 = std::abs(fd(0.2) - exact), e2 = std::abs(fd(0.1) - exact);
    EXPECT_GT(e1 / e2, 3.5) << fam;
    const double extrapolated = (4.0 * fd(0.1) - fd(0.2)) / 3.0;
    EXPECT_NEAR(extrapolated, exact, 1e-3 * std::abs(exact)) << fam;
  }
}

TEST(HZ, RotationsMatchPullbackDerivative) {
  const MetricProvider m = synthetic_metric("decay", 1e-4, 0.01, 0.4);
  const Point4 X = point(7.0, Vec3(2.0, -3.0, 6.5));
  const Vec4 w(1.0, -0.25, 0.4, -0.85);
  const double den = (m.inverse(X) * w)(0);
  const struct {
    ZField z;
    int i, j;
  } cases[] = {{ZField::Rot12, 1, 2}, {ZField::Rot13, 1, 3}, {ZField::Rot23, 2, 3}};
  for (const auto& c : cases) {
    const double exact = h_z(m, X, w, c.z);
    const double fd = -0.5 * w.dot(rotation_pullback_derivative(m, X, c.i, c.j, 1e-4) * w) / den;
    EXPECT_NEAR(fd, exact, 1e-6 * std::abs(exact) + 1e-14) << zfield_name(c.z);
  }
}

TEST(Frame, OutgoingCovectorComponents) {
  const double M = 0.3;
  const Vec3 om = directions()[2];
  const double r = 50.0;
  const Point4 X = point(10.0, r * om);
  const StarFrame f = star_frame(X, M, om);
  const Vec4 W = frame_components(f, outgoing_covector(om, rw_rho_prime(r, M)));
  EXPECT_NEAR(W(0), 2.0, 1e-15);
  EXPECT_NEAR(W.tail<3>().norm(), 0.0, 1e-15);
  const Vec4 w(0.9, 0.1, -0.4, 0.3);
  EXPECT_LT((covector_from_frame(f, frame_components(f, w)) - w).norm(), 1e-15);
}

TEST(SyntheticFamilies, EnvelopeShapes) {
  // Minkowski null frame with lowered L_a = (-1, omega), Lbar_a = (-1, -omega).
  const double eps = 0.01, gp = 0.4;
  const MetricProvider good = synthetic_metric("decay", 0.0, eps, gp);
  const MetricProvider bad = synthetic_metric("violating", 0.0, eps, gp);
  CounterRng rng(42);
  double good_lt = 0.0, generic = 0.0, bad_lt = 0.0;
  for (int k = 0; k < 400; ++k) {
    const double t = rng.uniform(0.0, 2000.0);
    const double r = rng.uniform(0.5 * t + 1.0, 2.0 * t + 10.0);
    const Vec3 om = rng.unit_vector();
    const Point4 X = point(t, r * om);
    Vec3 s1, s2;
    orthonormal_complement(om, s1, s2);
    const Vec4 L(-1.0, om.x(), om.y(), om.z()), Lb(-1.0, -om.x(), -om.y(), -om.z());
    const Vec4 S1(0.0, s1.x(), s1.y(), s1.z()), S2(0.0, s2.x(), s2.y(), s2.z());
    const double q = r - t;
    const double D = 1.0 + t + r;
    for (const MetricProvider* m : {&good, &bad}) {
      const Mat4 h = m->perturbation(X).h;
      double lt = 0.0;
      for (const Vec4* T : {&L, &S1, &S2}) lt = std::max(lt, std::abs(L.dot(h * *T)));
      const double lt_ratio = lt * std::pow(D, 1.0 + gp) / eps;
      if (m == &good) {
        good_lt = std::max(good_lt, lt_ratio);
        double all = 0.0;
        for (const Vec4* U : {&L, &Lb, &S1, &S2}) {
          for (const Vec4* V : {&L, &Lb, &S1, &S2}) all = std::max(all, std::abs(U->dot(h * *V)));
        }
        generic = std::max(generic, all * D * std::pow(1.0 + pos_part(q), gp) / eps);
      } else {
        bad_lt = std::max(bad_lt, lt_ratio);
      }
    }
  }
  EXPECT_LT(good_lt, 8.0);
  EXPECT_LT(generic, 8.0);
  EXPECT_GT(bad_lt, 5.0 * good_lt);
}

TEST(Trace, FlatCaseExact) {
  TraceOptions o;
  o.t_min = 10.0;
  for (double q : {-5.0, 0.0, 4.0}) {
    for (const Vec3& om : directions()) {
      const Trajectory tr = trace_characteristic(1000.0, q, om, flat_metric(), o);
      ASSERT_TRUE(tr.complete);
      EXPECT_NEAR(tr.states.back().t, 10.0, 1e-12);
      for (const auto& s : tr.states) {
        ASSERT_LT(std::abs(s.utilde), 1e-10);
        ASSERT_LT(s.deviation, 1e-10);
        ASSERT_NEAR(s.x.norm(), s.t - q, 1e-10);
      }
    }
  }
}

TEST(Trace, SchwarzschildBackgroundExact) {
  TraceOptions o;
  o.t_min = 10.0;
  for (double M : {1e-4, 0.5}) {
    for (double q : {-5.0, 0.0}) {
      for (const Vec3& om : directions()) {
        const Trajectory tr = trace_characteristic(1000.0, q, om, schwarzschild_asymptotic(M), o);
        ASSERT_TRUE(tr.complete);
        EXPECT_LT(max_abs_utilde(tr), 1e-10) << M << " " << q;
        for (const auto& s : tr.states) ASSERT_LT(s.deviation, 1e-10);
      }
    }
  }
}

TEST(Trace, NullResidualStaysAtRoundoff) {
  TraceOptions o;
  o.t_min = 10.0;
  const MetricProvider m = synthetic_metric("decay", 1e-4, 0.01, 0.4);
  const Trajectory tr = trace_characteristic(500.0, -3.0, directions()[3], m, o);
  for (const auto& s : tr.states) ASSERT_LT(std::abs(s.residual), 1e-8 * (1.0 + tr.T - s.t));
}

TEST(Trace, ProjectiveConsistency) {
  const MetricProvider m = synthetic_metric("decay", 1e-4, 0.01, 0.4);
  TraceOptions o;
  o.t_min = 10.0;
  const Trajectory a = trace_characteristic(400.0, -2.0, directions()[2], m, o);
  for (double lam : {0.7, 2.5}) {
    o.w_scale = lam;
    const Trajectory b = trace_characteristic(400.0, -2.0, directions()[2], m, o);
    ASSERT_EQ(a.states.size(), b.states.size());
    for (size_t k = 0; k < a.states.size(); ++k) {
      ASSERT_LT((a.states[k].x - b.states[k].x).norm(), 1e-9);
      ASSERT_LT((lam * a.states[k].w - b.states[k].w).norm(), 1e-9 * lam);
    }
  }
}

TEST(Trace, SyntheticBoundShape) {
  TraceOptions o;
  o.t_min = 10.0;
  double worst = 0.0;
  for (const char* fam : {"decay", "gaussian"}) {
    const MetricProvider m = synthetic_metric(fam, 1e-4, 0.01, 0.4);
    for (double q : {-8.0, -2.0, 0.0, 4.0}) {
      for (const Vec3& om : directions()) {
        const Trajectory tr = trace_characteristic(1000.0, q, om, m, o);
        worst = std::max(worst, utilde_bound_ratio(tr, m));
      }
    }
  }
  EXPECT_GT(worst, 0.1);
  EXPECT_LE(worst, 50.0);
}

TEST(Trace, DeviationIsLinearInEpsilon) {
  TraceOptions o;
  o.t_min = 10.0;
  const Trajectory a = trace_characteristic(500.0, -2.0, directions()[0], synthetic_metric("decay", 1e-4, 0.01, 0.4), o);
  const Trajectory b = trace_characteristic(500.0, -2.0, directions()[0], synthetic_metric("decay", 1e-4, 0.005, 0.4), o);
  const double ra = max_abs_utilde(a), rb = max_abs_utilde(b);
  EXPECT_NEAR(ra / rb, 2.0, 0.05);
}

TEST(Trace, ViolatingFamilyLosesTheBound) {
  // h_{LL} ~ eps / t drives u~ like eps ln T, so the weighted sup keeps growing with T.
  TraceOptions o;
  o.t_min = 10.0;
  const MetricProvider m = synthetic_metric("violating", 1e-4, 0.01, 0.4);
  const MetricProvider g = synthetic_metric("decay", 1e-4, 0.01, 0.4);
  const double c_short = utilde_bound_ratio(trace_characteristic(250.0, 0.0, directions()[0], m, o), m);
  const double c_long = utilde_bound_ratio(trace_characteristic(4000.0, 0.0, directions()[0], m, o), m);
  const double c_good = utilde_bound_ratio(trace_characteristic(4000.0, 0.0, directions()[0], g, o), g);
  EXPECT_GT(c_long, 1.3 * c_short);
  EXPECT_GT(c_long, 5.0 * c_good);
}

TEST(Trace, TimeComponentEnvelope) {
  TraceOptions o;
  o.t_min = 10.0;
  const MetricProvider m = synthetic_metric("decay", 1e-4, 0.01, 0.4);
  const MetricProvider v = synthetic_metric("violating", 1e-4, 0.01, 0.4);
  double good = 0.0, bad = 0.0;
  for (double q : {-5.0, 0.0, 4.0}) {
    for (const Vec3& om : directions()) {
      good = std::max(good, h_time_envelope_ratio(trace_characteristic(1000.0, q, om, m, o), m));
      bad = std::max(bad, h_time_envelope_ratio(trace_characteristic(1000.0, q, om, v, o), v));
    }
  }
  EXPECT_LE(good, 20.0);
  EXPECT_GT(bad, 20.0);
}

TEST(Trace, StepUnderflowReportsLastGoodState) {
  TraceOptions o;
  o.t_min = 10.0;
  o.local_tol = 1e-30;
  o.max_halvings = 3;
  const Trajectory tr = trace_characteristic(100.0, 0.0, directions()[1], synthetic_metric("decay", 1e-4, 0.01, 0.4), o);
  EXPECT_FALSE(tr.complete);
  EXPECT_FALSE(tr.failure.empty());
  ASSERT_FALSE(tr.states.empty());
  EXPECT_EQ(tr.states.back().t, 100.0);
}

TEST(Trace, RejectsBadInput) {
  TraceOptions o;
  o.t_min = 10.0;
  EXPECT_THROW(trace_characteristic(5.0, 0.0, directions()[0], flat_metric(), o), DomainError);
  EXPECT_THROW(trace_characteristic(100.0, 8.0, directions()[0], flat_metric(), o), DomainError);
  EXPECT_THROW(trace_characteristic(100.0, 0.0, Vec3::Zero(), flat_metric(), o), DomainError);
  EXPECT_THROW(make_metric("synthetic:unknown", 0.0, 0.01, 0.4), DomainError);
  EXPECT_THROW(make_metric("kerr", 0.0, 0.01, 0.4), DomainError);
}

TEST(Trace, StateAtInterpolates) {
  const MetricProvider m = synthetic_metric("decay", 1e-4, 0.01, 0.4);
  TraceOptions o;
  o.t_min = 10.0;
  const Trajectory coarse = trace_characteristic(300.0, -1.0, directions()[2], m, o);
  o.checkpoints = {123.4567, 45.678};
  const Trajectory fine = trace_characteristic(300.0, -1.0, directions()[2], m, o);
  for (double t : o.checkpoints) {
    const CharState a = state_at(coarse, t, m);
    const CharState b = state_at(fine, t, m);
    EXPECT_EQ(b.t, t);
    EXPECT_LT((a.x - b.x).norm(), 1e-8);
    EXPECT_LT((a.W - b.W).norm(), 1e-8);
  }
  EXPECT_THROW(state_at(coarse, 5.0, m), DomainError);
}

TEST(Reflection, ReproducesOutgoingNumbers) {
  const MetricProvider m = synthetic_metric("decay", 1e-4, 0.01, 0.4);
  TraceOptions o;
  o.t_min = 10.0;
  const Trajectory u = trace_characteristic(300.0, -2.0, directions()[3], m, o);
  const Trajectory v = trace_incoming(300.0, 2.0, directions()[3], reflect_time(m), o);
  ASSERT_EQ(u.states.size(), v.states.size());
  const size_t n = u.states.size();
  for (size_t k = 0; k < n; ++k) {
    const CharState& a = u.states[k];
    const CharState& b = v.states[k];
    ASSERT_EQ(b.t, -a.t);
    ASSERT_EQ(b.x, a.x);
    ASSERT_EQ(b.w(0), a.w(0));
    ASSERT_EQ(b.w.tail<3>(), Vec3(-a.w.tail<3>()));
    ASSERT_EQ(b.utilde, -a.utilde);
  }
  EXPECT_EQ(reflect_time(reflect_time(m)).name, m.name);
}

TEST(Reflection, SchwarzschildIncomingExact) {
  TraceOptions o;
  o.t_min = 10.0;
  const double M = 0.5;
  for (double p : {0.0, 5.0}) {
    const Trajectory v = trace_incoming(1000.0, p, directions()[1], schwarzschild_asymptotic(M), o);
    ASSERT_TRUE(v.complete);
    EXPECT_DOUBLE_EQ(v.states.front().t, -1000.0);
    for (const auto& s : v.states) {
      ASSERT_LT(std::abs(p - (s.t + rw_rho(s.x.norm(), M))), 1e-10);
      ASSERT_LE(s.t, -10.0 + 1e-9);
    }
  }
}

TEST(Convergence, TrivialCases) {
  TraceOptions o;
  o.t_min = 10.0;
  const std::vector<double> qs{-3.0, 0.0};
  const std::vector<Vec3> oms{directions()[0], directions()[2]};
  const MetricProvider m = synthetic_metric("decay", 1e-4, 0.01, 0.4);
  const ConvergenceRow same = convergence_study(200.0, 200.0, qs, oms, m, o);
  EXPECT_EQ(same.dX, 0.0);
  EXPECT_EQ(same.dW, 0.0);
  EXPECT_EQ(same.dWbar, 0.0);
  const ConvergenceRow flat = convergence_study(100.0, 200.0, qs, oms, schwarzschild_asymptotic(1e-4), o);
  EXPECT_LT(std::max({flat.dX, flat.dW, flat.dWbar}), 1e-9);
  EXPECT_THROW(convergence_study(200.0, 100.0, qs, oms, m, o), DomainError);
}

TEST(Convergence, DifferencesDecayInT) {
  TraceOptions o;
  o.t_min = 10.0;
  const double gp = 0.4;
  const MetricProvider m = synthetic_metric("decay", 1e-4, 0.01, gp);
  const ConvergenceReport rep = convergence_sweep(100.0, 3, {-4.0, 0.0, 4.0}, {directions()[0], directions()[2]}, m, o);
  ASSERT_EQ(rep.rows.size(), 3u);
  ASSERT_EQ(rep.exponents.size(), 2u);
  const double gpp = 0.5 * gp;
  EXPECT_GE(rep.fitted_exponent, 0.8 * (gp - gpp));
  for (double e : rep.exponents) EXPECT_GE(e, 0.8 * (gp - gpp));
}
