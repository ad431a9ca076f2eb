#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace mobius {

/// Points and vectors live in R^4; three-dimensional data keeps the last
/// coordinate at zero.
using Point = Eigen::Vector4d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Error categories. The numeric values double as CLI exit codes.
enum class ErrorCode : int {
  kConfig = 2,
  kIntersectingLink = 3,
  kUnresolvedLinking = 4,
  kSingularity = 5,
  kContainment = 6,
  kStall = 7,
  kDegenerateCurve = 8,
  kDomain = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(code_); }

 private:
  ErrorCode code_;
};

/// Uniform periodic trapezoid grid on [0, 2pi).
struct QuadratureSpec {
  int n = 128;

  explicit QuadratureSpec(int nodes = 128) : n(nodes) {
    if (n < 8) throw Error(ErrorCode::kConfig, "quadrature needs at least 8 nodes per circle");
  }
  double step() const { return kTwoPi / n; }
  double node(int i) const { return kTwoPi * i / n; }
};

/// Row-wise sum with a fixed reduction order: every row is summed
/// sequentially and rows are accumulated in index order, so the result does
/// not depend on the thread count.
template <typename RowFn>
double ordered_row_sum(int rows, RowFn&& row_sum) {
  std::vector<double> partial(rows, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows; ++i) partial[i] = row_sum(i);
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

inline double clamp_unit(double c) { return c < -1.0 ? -1.0 : (c > 1.0 ? 1.0 : c); }

/// 3x3 determinant of the first three coordinates of three R^4 vectors.
inline double det3(const Point& a, const Point& b, const Point& c) {
  return a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
         a[2] * (b[0] * c[1] - b[1] * c[0]);
}

}  // namespace mobius
