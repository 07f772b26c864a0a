#pragma once

#include <array>
#include <functional>

#include "nulllab/common.hpp"

namespace nulllab {

/// Index order used for every frame-component matrix: L, Lbar, S1, S2.
enum FrameIdx : int { kL = 0, kLbar = 1, kS1 = 2, kS2 = 3 };

/// Null frame at a direction omega. L = (1, omega), Lbar = (1, -omega), S1/S2 unit
/// tangents to the sphere (normalised d_theta, d_phi; axis-swapped chart near the z-poles).
struct NullFrame {
  Vec3 omega;
  Vec3 s1, s2;
  bool swapped_chart = false;
  std::array<Vec4, 4> vec;    // contravariant components
  std::array<Vec4, 4> covec;  // lowered with the Minkowski metric
};

NullFrame build_frame(const Vec3& omega);
NullFrame frame_at(const Vec3& x);

/// Same omega with (S1, S2) rotated by angle a in the tangent plane.
NullFrame rotate_tangent(const NullFrame& f, double a);

/// Symmetric 2-tensor stored by covariant Cartesian components.
class FrameTensor {
 public:
  FrameTensor() : cart_(Mat4::Zero()) {}
  explicit FrameTensor(const Mat4& cart);

  static FrameTensor from_frame(const Mat4& comps, const NullFrame& f);

  const Mat4& cart() const { return cart_; }
  /// h_UV = U^mu V^nu h_{mu nu} in (L, Lbar, S1, S2) order.
  Mat4 frame(const NullFrame& f) const;
  double component(const Vec4& u, const Vec4& v) const { return u.dot(cart_ * v); }

 private:
  Mat4 cart_;
};

/// m^{ab} h_{ab}.
double trace(const Mat4& h);
/// Same trace from frame components: -h_{L Lbar} + delta^{AB} h_{AB}.
double trace_frame(const Mat4& hf);

/// h_{ab} - m_{ab} tr h / 2.
Mat4 trace_reverse(const Mat4& h);

/// P(D,E) = tr D tr E / 4 - D^{ab} E_{ab} / 2 from Cartesian components.
double p_full(const Mat4& d, const Mat4& e);
/// The same form written in null-frame components.
double p_null(const Mat4& df, const Mat4& ef);
/// Tangential part -D_{AB} E^{AB} / 2 from frame components.
double p_s(const Mat4& df, const Mat4& ef);

struct DivergenceCheck {
  double cartesian = 0.0;
  double null_form = 0.0;
  double residual = 0.0;
};

using VectorField4 = std::function<Vec4(double t, const Vec3& x)>;

/// Divergence of a contravariant field by Cartesian central differences and by the
/// null decomposition L_mu d_q F^mu - Lbar_mu d_s F^mu + A_mu d_A F^mu.
DivergenceCheck null_divergence_check(const VectorField4& field, double t, const Vec3& x,
                                      double h = 1e-4);

}  // namespace nulllab
