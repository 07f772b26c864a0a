#include "nulllab/null_frame.hpp"

#include <cmath>

namespace nulllab {

namespace {

Vec4 lower(const Vec4& v) { return Vec4(-v(0), v(1), v(2), v(3)); }

Vec4 spatial(const Vec3& a) { return Vec4(0.0, a.x(), a.y(), a.z()); }

void fill_vectors(NullFrame& f) {
  f.vec[kL] = Vec4(1.0, f.omega.x(), f.omega.y(), f.omega.z());
  f.vec[kLbar] = Vec4(1.0, -f.omega.x(), -f.omega.y(), -f.omega.z());
  f.vec[kS1] = spatial(f.s1);
  f.vec[kS2] = spatial(f.s2);
  for (int a = 0; a < 4; ++a) f.covec[a] = lower(f.vec[a]);
}

// Polar-chart tangents for a unit vector; pole along z.
void polar_tangents(const Vec3& w, Vec3& et, Vec3& ep) {
  const double st = std::hypot(w.x(), w.y());
  const double ct = w.z();
  const double cp = w.x() / st;
  const double sp = w.y() / st;
  et = Vec3(ct * cp, ct * sp, -st);
  ep = Vec3(-sp, cp, 0.0);
}

// Contraction matrix c^{ab} with m^{mu nu} = sum c^{ab} e_a^mu e_b^nu.
Mat4 inverse_gram() {
  Mat4 c = Mat4::Zero();
  c(kL, kLbar) = c(kLbar, kL) = -0.5;
  c(kS1, kS1) = c(kS2, kS2) = 1.0;
  return c;
}

}  // namespace

NullFrame build_frame(const Vec3& omega) {
  if (!omega.allFinite() || std::abs(omega.norm() - 1.0) > 1e-12) {
    throw DomainError("build_frame: omega must be a unit vector");
  }
  NullFrame f;
  f.omega = omega;
  const double st = std::hypot(omega.x(), omega.y());
  if (st >= 1e-6) {
    polar_tangents(omega, f.s1, f.s2);
  } else {
    // Pole along x: cyclic relabelling (x,y,z) -> (y,z,x) keeps orientation.
    const Vec3 w(omega.y(), omega.z(), omega.x());
    Vec3 et, ep;
    polar_tangents(w, et, ep);
    f.s1 = Vec3(et.z(), et.x(), et.y());
    f.s2 = Vec3(ep.z(), ep.x(), ep.y());
    f.swapped_chart = true;
  }
  fill_vectors(f);
  return f;
}

NullFrame frame_at(const Vec3& x) {
  const double r = x.norm();
  if (!(r > 0.0)) throw DomainError("frame_at: null frame undefined at r = 0");
  return build_frame(x / r);
}

NullFrame rotate_tangent(const NullFrame& f, double a) {
  NullFrame g = f;
  g.s1 = std::cos(a) * f.s1 + std::sin(a) * f.s2;
  g.s2 = -std::sin(a) * f.s1 + std::cos(a) * f.s2;
  fill_vectors(g);
  return g;
}

FrameTensor::FrameTensor(const Mat4& cart) : cart_(0.5 * (cart + cart.transpose())) {}

Mat4 FrameTensor::frame(const NullFrame& f) const {
  Mat4 out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) out(a, b) = f.vec[a].dot(cart_ * f.vec[b]);
  return out;
}

FrameTensor FrameTensor::from_frame(const Mat4& comps, const NullFrame& f) {
  // h_{mu nu} = c^{ac} c^{bd} h_{cd} (e_a)_mu (e_b)_nu with lowered frame vectors.
  const Mat4 c = inverse_gram();
  const Mat4 k = c * comps * c;
  Mat4 e;
  for (int a = 0; a < 4; ++a) e.col(a) = f.covec[a];
  return FrameTensor(e * k * e.transpose());
}

double trace(const Mat4& h) { return -h(0, 0) + h(1, 1) + h(2, 2) + h(3, 3); }

double trace_frame(const Mat4& hf) { return -hf(kL, kLbar) + hf(kS1, kS1) + hf(kS2, kS2); }

Mat4 trace_reverse(const Mat4& h) { return h - 0.5 * trace(h) * minkowski(); }

double p_full(const Mat4& d, const Mat4& e) {
  const Mat4 m = minkowski();
  const double contraction = (m * d * m).cwiseProduct(e).sum();
  return 0.25 * trace(d) * trace(e) - 0.5 * contraction;
}

double p_null(const Mat4& df, const Mat4& ef) {
  const double dA = df(kS1, kS1) + df(kS2, kS2);
  const double eA = ef(kS1, kS1) + ef(kS2, kS2);
  double ab = 0.0;
  double mixed = 0.0;
  for (int c = kS1; c <= kS2; ++c) {
    mixed += df(c, kL) * ef(c, kLbar) + df(c, kLbar) * ef(c, kL);
    for (int d = kS1; d <= kS2; ++d) ab += df(c, d) * ef(c, d);
  }
  return -0.125 * (df(kL, kL) * ef(kLbar, kLbar) + df(kLbar, kLbar) * ef(kL, kL)) -
         0.25 * (2.0 * ab - dA * eA) + 0.5 * mixed -
         0.25 * (df(kL, kLbar) * eA + dA * ef(kL, kLbar));
}

double p_s(const Mat4& df, const Mat4& ef) {
  double s = 0.0;
  for (int c = kS1; c <= kS2; ++c)
    for (int d = kS1; d <= kS2; ++d) s += df(c, d) * ef(c, d);
  return -0.5 * s;
}

DivergenceCheck null_divergence_check(const VectorField4& field, double t, const Vec3& x,
                                      double h) {
  const double r = x.norm();
  if (!(h > 0.0)) throw DomainError("null_divergence_check: step must be positive");
  if (r <= 4.0 * h) throw DomainError("null_divergence_check: stencil reaches r = 0");
  auto at = [&](const Vec4& p) { return field(p(0), p.tail<3>()); };
  const Vec4 p0(t, x.x(), x.y(), x.z());
  auto deriv = [&](const Vec4& dir) -> Vec4 {
    return (at(p0 + h * dir) - at(p0 - h * dir)) / (2.0 * h);
  };

  DivergenceCheck out;
  for (int mu = 0; mu < 4; ++mu) out.cartesian += deriv(Vec4::Unit(mu))(mu);

  const NullFrame f = frame_at(x);
  const Vec4 dq_dir = 0.5 * (spatial(f.omega) - Vec4::Unit(0));
  const Vec4 ds_dir = 0.5 * (spatial(f.omega) + Vec4::Unit(0));
  out.null_form = f.covec[kL].dot(deriv(dq_dir)) - f.covec[kLbar].dot(deriv(ds_dir)) +
                  f.covec[kS1].dot(deriv(f.vec[kS1])) + f.covec[kS2].dot(deriv(f.vec[kS2]));
  out.residual = std::abs(out.cartesian - out.null_form);
  return out;
}

}  // namespace nulllab
