#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "mobius/common.hpp"

namespace mobius {

/// Seeded generator whose output does not depend on the standard library's
/// distribution implementations, so scans are reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    // Box-Muller; the second variate is discarded to keep the stream simple.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  Point unit_vector4() {
    Point p;
    do {
      for (int i = 0; i < 4; ++i) p[i] = normal();
    } while (p.norm() < 1e-12);
    return p.normalized();
  }

  /// Uniformly distributed point of the closed ball of the given radius.
  Point ball_point4(double radius) {
    return radius * std::pow(uniform(), 0.25) * unit_vector4();
  }

 private:
  std::mt19937_64 engine_;
};

/// Radical inverse in the given base (van der Corput).
inline double radical_inverse(std::uint64_t index, std::uint32_t base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

/// Five-dimensional Halton point (bases 2, 3, 5, 7, 11). Index 0 is skipped
/// by callers that need interior points.
inline std::array<double, 5> halton5(std::uint64_t index) {
  static constexpr std::array<std::uint32_t, 5> kBases{2, 3, 5, 7, 11};
  std::array<double, 5> out{};
  for (int i = 0; i < 5; ++i) out[i] = radical_inverse(index, kBases[i]);
  return out;
}

/// Radial stretch of the cube [-1,1]^4 onto the closed unit ball: each ray
/// from the origin is rescaled so the max-norm becomes the Euclidean norm.
/// The map is continuous, orientation preserving and fixes the origin.
inline Point cube_to_ball(const Point& y) {
  const double euclid = y.norm();
  if (euclid == 0.0) return Point::Zero();
  return y * (y.cwiseAbs().maxCoeff() / euclid);
}

}  // namespace mobius
