#pragma once

#include <optional>

#include "mobius/link_geometry.hpp"

namespace mobius {

/// Pointwise data of the chord direction map g = (x - y) / |x - y| of a pair
/// of curves, evaluated at one parameter pair.
struct GaussMapSample {
  Point g = Point::Zero();
  Point dgds = Point::Zero();
  Point dgdt = Point::Zero();
  double jac = 0.0;
  /// |x'| |y'| / |x - y|^2, the pointwise upper bound for jac.
  double bound = 0.0;
  /// <x', y'>, <x', x - y>, <y', x - y>; all vanish where jac == bound.
  Eigen::Vector3d residuals = Eigen::Vector3d::Zero();
  /// |x'|, |y'|.
  Eigen::Vector2d speeds = Eigen::Vector2d::Zero();
  double speed_product = 0.0;
  double chord = 0.0;

  /// Equality case of the Jacobian estimate, with a relative gap.
  bool near_equality(double rel_gap = 1e-9) const { return jac >= bound * (1.0 - rel_gap) && bound > 0.0; }
  /// Largest of the three residuals as a cosine: 1 - jac/bound is about
  /// half the sum of their squares.
  double scaled_residual() const {
    if (!(speed_product > 0.0 && chord > 0.0)) return 0.0;
    return std::max({std::abs(residuals[0]) / speed_product, std::abs(residuals[1]) / (speeds[0] * chord),
                     std::abs(residuals[2]) / (speeds[1] * chord)});
  }
};

/// Gauss map data from positions and tangents of the two curves.
inline GaussMapSample gauss_map_sample(const Point& x, const Point& dx, const Point& y, const Point& dy) {
  GaussMapSample out;
  const Point d = x - y;
  const double r = d.norm();
  out.chord = r;
  out.g = d / r;
  out.dgds = (dx - out.g.dot(dx) * out.g) / r;
  out.dgdt = -(dy - out.g.dot(dy) * out.g) / r;
  const double ss = out.dgds.squaredNorm(), tt = out.dgdt.squaredNorm(), st = out.dgds.dot(out.dgdt);
  out.jac = std::sqrt(std::max(0.0, ss * tt - st * st));
  out.speeds = Eigen::Vector2d(dx.norm(), dy.norm());
  out.speed_product = out.speeds[0] * out.speeds[1];
  out.bound = out.speed_product / (r * r);
  out.residuals = Eigen::Vector3d(dx.dot(dy), dx.dot(d), dy.dot(d));
  return out;
}

/// Gauss map of a link at (s, t).
inline GaussMapSample gauss_map(const Link& link, double s, double t) {
  return gauss_map_sample(link.gamma1().eval(s), link.gamma1().derivative(s), link.gamma2().eval(t),
                          link.gamma2().derivative(t));
}

/// Trapezoid approximation of the Mobius cross energy
///   E = int int |x'(s)| |y'(t)| / |x(s) - y(t)|^2 ds dt.
inline double mobius_energy(const Link& link, const QuadratureSpec& quad) {
  const int n = quad.n;
  const CurveSamples a = link.gamma1().sample(n), b = link.gamma2().sample(n);
  std::vector<double> sb(n);
  for (int j = 0; j < n; ++j) sb[j] = b.vel[j].norm();
  const double h = quad.step();
  return h * h * ordered_row_sum(n, [&](int i) {
           const double si = a.vel[i].norm();
           double row = 0.0;
           for (int j = 0; j < n; ++j) row += si * sb[j] / (a.pos[i] - b.pos[j]).squaredNorm();
           return row;
         });
}

/// Affine hyperplane of R^4 with an oriented orthonormal frame:
/// det[e1 e2 e3 normal] = +1.
struct OrientedHyperplane {
  Point origin = Point::Zero();
  Eigen::Matrix<double, 4, 3> frame;
  Point normal = Point::Zero();
  double max_residual = 0.0;

  Point to_local(const Point& x) const {
    Point out = Point::Zero();
    out.head<3>() = frame.transpose() * (x - origin);
    return out;
  }
  Point vector_to_local(const Point& v) const {
    Point out = Point::Zero();
    out.head<3>() = frame.transpose() * v;
    return out;
  }
};

/// Least-squares hyperplane through both components. Without a hint the
/// normal is oriented so that its largest-magnitude coordinate is positive.
inline OrientedHyperplane fit_hyperplane(const Link& link, int probes, std::optional<Point> normal_hint = {}) {
  const CurveSamples a = link.gamma1().sample(probes), b = link.gamma2().sample(probes);
  std::vector<Point> pts = a.pos;
  pts.insert(pts.end(), b.pos.begin(), b.pos.end());
  Point c = Point::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  double extent = 0.0;
  for (const auto& p : pts) {
    cov += (p - c) * (p - c).transpose();
    extent = std::max(extent, (p - c).norm());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(cov);
  OrientedHyperplane hp;
  hp.origin = c;
  hp.normal = eig.eigenvectors().col(0);
  if (normal_hint) {
    if (hp.normal.dot(*normal_hint) < 0) hp.normal = -hp.normal;
  } else {
    Eigen::Index idx;
    hp.normal.cwiseAbs().maxCoeff(&idx);
    if (hp.normal[idx] < 0) hp.normal = -hp.normal;
  }
  for (int k = 0; k < 3; ++k) hp.frame.col(k) = eig.eigenvectors().col(k + 1);
  Eigen::Matrix4d m;
  m << hp.frame, hp.normal;
  if (m.determinant() < 0) hp.frame.col(2) = -hp.frame.col(2);
  for (const auto& p : pts) hp.max_residual = std::max(hp.max_residual, std::abs((p - c).dot(hp.normal)));
  hp.max_residual /= std::max(1.0, extent);
  return hp;
}

/// Gauss linking integral
///   (1 / 4pi) int int det(x', y', x - y) / |x - y|^3 ds dt.
/// A 4-dimensional link must lie in an affine hyperplane; it is evaluated in
/// that hyperplane with the orientation induced by its normal.
inline double gauss_linking_integral(const Link& link, const QuadratureSpec& quad,
                                     std::optional<Point> normal_hint = {}) {
  const int n = quad.n;
  CurveSamples a = link.gamma1().sample(n), b = link.gamma2().sample(n);
  if (link.dim() == 4) {
    const OrientedHyperplane hp = fit_hyperplane(link, std::max(n, 64), normal_hint);
    if (hp.max_residual > 1e-8)
      throw Error(ErrorCode::kDomain, "4-dimensional link is not contained in a hyperplane (residual " +
                                          std::to_string(hp.max_residual) + ")");
    for (auto* cs : {&a, &b})
      for (int j = 0; j < n; ++j) {
        cs->pos[j] = hp.to_local(cs->pos[j]);
        cs->vel[j] = hp.vector_to_local(cs->vel[j]);
      }
  }
  const double h = quad.step();
  const double sum = ordered_row_sum(n, [&](int i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      const Point d = a.pos[i] - b.pos[j];
      const double r = d.norm();
      row += det3(a.vel[i], b.vel[j], d) / (r * r * r);
    }
    return row;
  });
  return h * h * sum / (4.0 * kPi);
}

/// Links on S^3 that span R^4 are first charted to R^3 by stereographic
/// projection from the point of S^3 farthest from the link; others go to
/// gauss_linking_integral unchanged.
inline double gauss_linking_integral_any(const Link& link, const QuadratureSpec& quad) {
  if (link.dim() == 4 && on_unit_sphere(link) && fit_hyperplane(link, std::max(quad.n, 64)).max_residual > 1e-8) {
    const Link chart = stereographic_chart(link, farthest_pole(link));
    const int modes = std::max(chart.gamma1().modes(), chart.gamma2().modes());
    return gauss_linking_integral(chart, QuadratureSpec(std::max(quad.n, 4 * modes)));
  }
  return gauss_linking_integral(link, quad);
}

/// Integer linking number. Throws kUnresolvedLinking when the Gauss
/// integral is more than 0.1 away from an integer.
inline int linking_number(const Link& link, const QuadratureSpec& quad, std::optional<Point> normal_hint = {}) {
  const double v = normal_hint ? gauss_linking_integral(link, quad, normal_hint) : gauss_linking_integral_any(link, quad);
  const double r = std::round(v);
  if (std::abs(v - r) > 0.1)
    throw Error(ErrorCode::kUnresolvedLinking, "Gauss integral " + std::to_string(v) + " at N=" +
                                                   std::to_string(quad.n) + " is not near an integer; increase N");
  return static_cast<int>(r);
}

struct LowerBoundReport {
  double energy = 0.0;
  int lk = 0;
  /// energy - 4 pi |lk|
  double slack = 0.0;
};

inline LowerBoundReport energy_lower_bound_report(const Link& link, const QuadratureSpec& quad) {
  LowerBoundReport r;
  r.energy = mobius_energy(link, quad);
  r.lk = linking_number(link, quad);
  r.slack = r.energy - 4.0 * kPi * std::abs(r.lk);
  return r;
}

}  // namespace mobius
