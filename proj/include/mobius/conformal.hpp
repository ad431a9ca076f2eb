#pragma once

#include <variant>
#include <vector>

#include "mobius/link_geometry.hpp"

namespace mobius {

/// Offset of the boundary maps for |v| = 1: b(z) = (2z - 1) / (z (1 - z)).
inline double boundary_b(double z) { return (2.0 * z - 1.0) / (z * (1.0 - z)); }

/// Sphere inversion F_v(x) = (x - v) / |x - v|^2.
struct Inversion {
  Point v = Point::Zero();
};

/// Dilation D_{w,lambda}(x) = lambda (x - w) + w.
struct Dilation {
  Point w = Point::Zero();
  double lambda = 1.0;
};

/// Boundary map L_(v,z)(x) = F_v(x) - b(z) v for unit v.
struct BoundaryMap {
  Point v = Point::Zero();
  double z = 0.5;
};

class ConformalMap;
using Composition = std::vector<ConformalMap>;

/// One of the conformal or affine maps used by the canonical family, or a
/// composition of them (members applied first to last).
class ConformalMap {
 public:
  using Node = std::variant<Inversion, Dilation, BoundaryMap, Composition>;

  ConformalMap() : node_(Composition{}) {}
  explicit ConformalMap(Node node) : node_(std::move(node)) {}

  static ConformalMap inversion(const Point& v) { return ConformalMap(Inversion{v}); }
  static ConformalMap dilation(const Point& w, double lambda) { return ConformalMap(Dilation{w, lambda}); }
  static ConformalMap boundary(const Point& v, double z) {
    if (!(z > 0.0 && z < 1.0)) throw Error(ErrorCode::kDomain, "boundary map needs 0 < z < 1");
    if (std::abs(v.norm() - 1.0) > 1e-9) throw Error(ErrorCode::kDomain, "boundary map needs a unit vector");
    return ConformalMap(BoundaryMap{v, z});
  }
  static ConformalMap compose(Composition maps) { return ConformalMap(std::move(maps)); }
  static ConformalMap identity() { return ConformalMap(); }

  const Node& node() const { return node_; }

  Point apply(const Point& x) const { return apply_with_differential(x).first; }
  Eigen::Matrix4d differential(const Point& x) const { return apply_with_differential(x).second; }

  /// Image and differential at x; throws kSingularity at an inversion center.
  std::pair<Point, Eigen::Matrix4d> apply_with_differential(const Point& x) const {
    return std::visit([&](const auto& m) { return eval(m, x); }, node_);
  }

  /// Every point this map (or one of its members) inverts about.
  std::vector<Point> centers() const {
    std::vector<Point> out;
    collect_centers(out);
    return out;
  }

  /// True when the map sends the hyperplane x4 = 0 into itself.
  bool preserves_r3() const {
    for (const auto& c : centers())
      if (c[3] != 0.0) return false;
    if (const auto* d = std::get_if<Dilation>(&node_)) return d->w[3] == 0.0;
    if (const auto* b = std::get_if<BoundaryMap>(&node_)) return b->v[3] == 0.0;
    if (const auto* c = std::get_if<Composition>(&node_))
      for (const auto& m : *c)
        if (!m.preserves_r3()) return false;
    return true;
  }

 private:
  static std::pair<Point, Eigen::Matrix4d> invert(const Point& v, const Point& x) {
    const Point d = x - v;
    const double r2 = d.squaredNorm();
    if (r2 < 1e-24) throw Error(ErrorCode::kSingularity, "evaluation at an inversion center");
    const Point u = d / std::sqrt(r2);
    return {d / r2, (Eigen::Matrix4d::Identity() - 2.0 * u * u.transpose()) / r2};
  }
  static std::pair<Point, Eigen::Matrix4d> eval(const Inversion& m, const Point& x) { return invert(m.v, x); }
  static std::pair<Point, Eigen::Matrix4d> eval(const Dilation& m, const Point& x) {
    return {m.lambda * (x - m.w) + m.w, m.lambda * Eigen::Matrix4d::Identity()};
  }
  static std::pair<Point, Eigen::Matrix4d> eval(const BoundaryMap& m, const Point& x) {
    auto [y, dy] = invert(m.v, x);
    return {y - boundary_b(m.z) * m.v, dy};
  }
  static std::pair<Point, Eigen::Matrix4d> eval(const Composition& maps, const Point& x) {
    Point y = x;
    Eigen::Matrix4d dy = Eigen::Matrix4d::Identity();
    for (const auto& m : maps) {
      auto [next, d] = m.apply_with_differential(y);
      y = next;
      dy = d * dy;
    }
    return {y, dy};
  }

  void collect_centers(std::vector<Point>& out) const {
    if (const auto* i = std::get_if<Inversion>(&node_)) out.push_back(i->v);
    if (const auto* b = std::get_if<BoundaryMap>(&node_)) out.push_back(b->v);
    if (const auto* c = std::get_if<Composition>(&node_))
      for (const auto& m : *c) m.collect_centers(out);
  }

  Node node_;
};

struct ImageSphere {
  Point center = Point::Zero();
  double radius = 1.0;
};

/// F_v maps the unit sphere onto the sphere with center v / (1 - |v|^2) and
/// radius 1 / (1 - |v|^2).
inline ImageSphere image_sphere(const Point& v) {
  const double q = 1.0 - v.squaredNorm();
  if (v.norm() >= 1.0 - 1e-9)
    throw Error(ErrorCode::kDomain, "image sphere undefined for |v| >= 1; use the boundary maps");
  return {v / q, 1.0 / q};
}

/// <L_(v,z)(x), v> + 1/2 + b(z); zero for every x on S^3 other than v.
inline double boundary_map_plane_check(const Point& v, double z, const Point& x) {
  if ((x - v).norm() < 1e-12) throw Error(ErrorCode::kSingularity, "x coincides with the boundary-map center");
  return ConformalMap::boundary(v, z).apply(x).dot(v) + 0.5 + boundary_b(z);
}

/// Refit of map o curve. Modes are doubled from the input's count until the
/// refit agrees with pointwise application to 1e-8 on a probe grid.
inline Curve pushforward_curve(const ConformalMap& map, const Curve& curve, double tol = 1e-8) {
  const auto centers = map.centers();
  if (!centers.empty()) {
    const CurveSamples s = curve.sample(std::max(512, 8 * curve.modes()));
    for (const auto& c : centers)
      for (const auto& p : s.pos)
        if ((p - c).norm() < 1e-6) throw Error(ErrorCode::kSingularity, "inversion center lies on the curve");
  }
  const int dim = (curve.dim() == 3 && map.preserves_r3()) ? 3 : 4;
  return fit_function(dim, [&](double s) { return map.apply(curve.eval(s)); }, tol, std::max(curve.modes(), 4),
                      512);
}

inline Link pushforward_link(const ConformalMap& map, const Link& link) {
  return Link(pushforward_curve(map, link.gamma1()), pushforward_curve(map, link.gamma2()));
}

struct DerivativeBoundReport {
  double max_ratio = 0.0;
  /// Speed bound C = max |x'| on the probe grid.
  double speed_bound = 0.0;
  int excluded = 0;
  bool holds() const { return max_ratio <= 3.0 * speed_bound + 1e-8; }
};

/// Max over samples of |(F_v o x)'| / |F_v o x|^2, skipping samples within
/// 1e-6 of v.
inline DerivativeBoundReport derivative_bound_check(const Curve& curve, const Point& v, int samples) {
  DerivativeBoundReport r;
  r.speed_bound = max_speed(curve, std::max(1024, samples));
  const ConformalMap f = ConformalMap::inversion(v);
  for (int j = 0; j < samples; ++j) {
    const double s = kTwoPi * (j + 0.5) / samples;
    const Point x = curve.eval(s);
    if ((x - v).norm() < 1e-6) {
      ++r.excluded;
      continue;
    }
    auto [y, dy] = f.apply_with_differential(x);
    r.max_ratio = std::max(r.max_ratio, (dy * curve.derivative(s)).norm() / y.squaredNorm());
  }
  return r;
}

}  // namespace mobius
