#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace nulllab {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Input outside the region where an operation is defined.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Data fails a structural or constraint check.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Quadrature, root finding or time stepping did not reach tolerance.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A degenerate denominator was hit (e.g. a non-timelike characteristic).
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Japanese bracket <x> = sqrt(1 + x^2).
inline double jbracket(double x) { return std::hypot(1.0, x); }

inline double pos_part(double x) { return x > 0.0 ? x : 0.0; }
inline double neg_part(double x) { return x < 0.0 ? -x : 0.0; }

/// Minkowski metric diag(-1, 1, 1, 1); it is its own inverse.
inline Mat4 minkowski() {
  Mat4 m = Mat4::Identity();
  m(0, 0) = -1.0;
  return m;
}

using ScalarField = std::function<double(double t, const Vec3& x)>;

/// Counter-based 64-bit generator (splitmix64 finaliser over seed + counter).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x9E3779B97F4A7C15ULL))) {}

  std::uint64_t next() { return mix(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  Vec3 unit_vector() {
    Vec3 v(normal(), normal(), normal());
    while (v.norm() < 1e-12) v = Vec3(normal(), normal(), normal());
    return v.normalized();
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace nulllab
