#pragma once

#include <array>
#include <string>

#include "mobius/canonical_family.hpp"

namespace mobius {

/// Exponential map of S^3 at p applied to a tangent vector y (y orthogonal to p).
inline Point exp_map(const Point& p, const Point& y) {
  const double r = y.norm();
  if (r < 1e-300) return p;
  return std::cos(r) * p + std::sin(r) * (y / r);
}

struct LogResult {
  double distance = 0.0;
  Point tangent = Point::Zero();
};

/// Inverse of the exponential map: |tangent| = distance = d(p, x).
inline LogResult log_map(const Point& p, const Point& x) {
  const double c = p.dot(x);
  const Point w = x - c * p;
  const double sn = w.norm();
  LogResult out;
  out.distance = std::atan2(sn, c);
  if (sn < 1e-300) {
    if (c < 0) throw Error(ErrorCode::kDomain, "logarithm undefined at the antipode");
    return out;
  }
  if (kPi - out.distance < 1e-12) throw Error(ErrorCode::kDomain, "logarithm undefined at the antipode");
  out.tangent = w * (out.distance / sn);
  return out;
}

/// Geodesic radial contraction of the annulus
/// closure(B_{pi/2}(p)) \ B_lambda(p) onto the sphere of radius lambda:
///   R(x) = exp_p(((1 - t) + t lambda / d(p,x)) exp_p^{-1}(x)).
struct Retraction {
  Point p = Point(0, 0, 0, 1);
  double lambda = kPi / 2;
  double t = 0.0;

  Retraction() = default;
  Retraction(const Point& center, double radius, double time) : p(center), lambda(radius), t(time) {
    if (!(radius >= 0.0 && radius <= kPi / 2 + 1e-12)) throw Error(ErrorCode::kDomain, "lambda must be in [0, pi/2]");
    if (!(time >= 0.0 && time <= 1.0)) throw Error(ErrorCode::kDomain, "t must be in [0, 1]");
  }

  /// Geodesic distance to p, projected onto [lambda, pi/2] when it lies
  /// within tol outside; throws otherwise.
  double domain_distance(const Point& x, double tol, ErrorCode code) const {
    const double d = std::atan2((x - p.dot(x) * p).norm(), p.dot(x));
    if (d < lambda - tol || d > kPi / 2 + tol)
      throw Error(code, "point at distance " + std::to_string(d) + " is outside the annulus [" +
                            std::to_string(lambda) + ", pi/2]");
    return std::clamp(d, lambda, kPi / 2);
  }

  double image_distance(double d) const { return (1.0 - t) * d + t * lambda; }

  Point apply(const Point& x, double tol = 1e-9, ErrorCode code = ErrorCode::kDomain) const {
    const double d = domain_distance(x, tol, code);
    if (d < 1e-300) return p;
    const Point u = unit_direction(x);
    const double dn = image_distance(d);
    return std::cos(dn) * p + std::sin(dn) * u;
  }

  /// Differential applied to a tangent vector w at x: the radial part is
  /// scaled by (1 - t), the orthogonal part by sin(d') / sin(d).
  Point differential(const Point& x, const Point& w, double tol = 1e-9, ErrorCode code = ErrorCode::kDomain) const {
    const double d = domain_distance(x, tol, code);
    const Point u = unit_direction(x);
    const double dn = image_distance(d);
    const Point er = -std::sin(d) * p + std::cos(d) * u;
    const Point er_new = -std::sin(dn) * p + std::cos(dn) * u;
    const Point wt = w - w.dot(x) * x;
    const double radial = wt.dot(er);
    const Point ortho = wt - radial * er;
    const double stretch = std::sin(d) > 1e-300 ? std::sin(dn) / std::sin(d) : 1.0;
    return (1.0 - t) * radial * er_new + stretch * ortho;
  }

 private:
  Point unit_direction(const Point& x) const {
    Point w = x - p.dot(x) * p;
    const double n = w.norm();
    if (n < 1e-300) throw Error(ErrorCode::kDomain, "direction undefined at the center");
    return w / n;
  }
};

inline Point retract(const Retraction& r, const Point& x) { return r.apply(x); }

/// Orthonormal basis of the tangent space of S^3 at x.
inline Eigen::Matrix<double, 4, 3> tangent_basis(const Point& x) {
  Eigen::Matrix<double, 4, 3> out;
  int k = 0;
  for (int i = 0; i < 4 && k < 3; ++i) {
    Point e = Point::Unit(i);
    e -= e.dot(x) * x;
    for (int j = 0; j < k; ++j) e -= e.dot(out.col(j)) * out.col(j);
    if (e.norm() > 1e-6) out.col(k++) = e.normalized();
  }
  return out;
}

/// Largest singular value of the finite-difference differential
/// (central differences along geodesics, step h) over the sample points.
inline double retract_contraction_check(const Retraction& r, const std::vector<Point>& samples, double h = 1e-5) {
  double worst = 0.0;
  for (const auto& x : samples) {
    const auto basis = tangent_basis(x);
    Eigen::Matrix<double, 4, 3> jac;
    for (int k = 0; k < 3; ++k) {
      const Point e = basis.col(k);
      jac.col(k) = (r.apply(exp_map(x, h * e)) - r.apply(exp_map(x, -h * e))) / (2.0 * h);
    }
    worst = std::max(worst, Eigen::JacobiSVD<Eigen::Matrix<double, 4, 3>>(jac).singularValues()[0]);
  }
  return worst;
}

/// Area of the geodesic sphere of radius r in S^3.
inline double geodesic_sphere_area(double r) { return 4.0 * kPi * std::sin(r) * std::sin(r); }

/// Same area from a parametrized grid: polar angle by Gauss-Legendre nodes,
/// azimuth by the trapezoid rule, Jacobian from the embedding in R^4.
inline double geodesic_sphere_area_grid(const Point& center, double r, int n = 64) {
  const auto basis = tangent_basis(center);
  // Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n.
  std::vector<double> xs(n), ws(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        break;
      }
    }
  }
  double area = 0.0;
  const int m = 2 * n;
  for (int i = 0; i < n; ++i) {
    const double th = 0.5 * kPi * (xs[i] + 1.0), wth = 0.5 * kPi * ws[i];
    for (int j = 0; j < m; ++j) {
      const double ph = kTwoPi * j / m;
      // direction on the unit 2-sphere of T_center S^3 and its derivatives
      const Point dir = basis * Eigen::Vector3d(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
      const Point dth = basis * Eigen::Vector3d(std::cos(th) * std::cos(ph), std::cos(th) * std::sin(ph), -std::sin(th));
      const Point dph = basis * Eigen::Vector3d(-std::sin(th) * std::sin(ph), std::sin(th) * std::cos(ph), 0.0);
      (void)dir;
      const Point a = std::sin(r) * dth, b = std::sin(r) * dph;
      const double jac = std::sqrt(std::max(0.0, a.squaredNorm() * b.squaredNorm() - a.dot(b) * a.dot(b)));
      area += wth * (kTwoPi / m) * jac;
    }
  }
  return area;
}

struct RetractedArea {
  double area = 0.0;
  double base_area = 0.0;
  /// Integral of the Jacobian signed by the outward normal of the sphere
  /// about the center through each image node; folds cancel, so at s = 1
  /// this is deg * area(boundary of B_lambda).
  double signed_area = 0.0;
  /// Center and radius of the retraction that was applied.
  Point center = Point::Zero();
  double lambda = 0.0;
  /// max(jac(R o g) - jac(g)) over nodes.
  double max_node_excess = -std::numeric_limits<double>::infinity();
  /// max | d(center, R(g)) - image distance | over nodes at s = 1, and in
  /// general the distance spread of the image.
  double max_sphere_residual = 0.0;
  int excluded = 0;
};

/// Retraction applied to the boundary-family member C(p, z): centered at p
/// with lambda = r(z) for z >= 1/2, at -p with lambda = pi - r(z) otherwise.
inline Retraction family_retraction(const Point& p, double z, double alpha, double s) {
  const double r = support_radius(z, alpha);
  return z >= 0.5 ? Retraction(p, r, s) : Retraction(-p, kPi - r, s);
}

/// Area of R_(p, r(z), s) o g_(p,z).
inline RetractedArea retracted_family_area(const CanonicalFamily& fam, const Point& p, double z, double s) {
  RetractedArea out;
  const FamilyPoint fp = family_coeffs(p, z);
  if (!fp.boundary) throw Error(ErrorCode::kDomain, "retracted family needs a unit vector p");
  if (fp.zero_surface) return out;
  const Retraction ret = family_retraction(fp.v, z, fam.link().alpha(), s);
  out.center = ret.p;
  out.lambda = ret.lambda;
  const auto t = fam.transform(fp);
  const int n = fam.quad().n;
  std::vector<RetractedArea> rows(n);
  std::vector<Error> errors;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    RetractedArea& r = rows[i];
    for (int j = 0; j < n; ++j) {
      const auto nd = fam.node(t, i, j);
      if (nd.excluded) {
        ++r.excluded;
        continue;
      }
      const GaussMapSample& g = nd.sample;
      double d = 0.0;
      Point img, a, b;
      try {
        d = ret.domain_distance(g.g, 1e-9, ErrorCode::kContainment);
        img = ret.apply(g.g, 1e-9, ErrorCode::kContainment);
        a = ret.differential(g.g, g.dgds, 1e-9, ErrorCode::kContainment);
        b = ret.differential(g.g, g.dgdt, 1e-9, ErrorCode::kContainment);
      } catch (const Error& e) {
#pragma omp critical
        errors.push_back(e);
        continue;
      }
      const double jac = std::sqrt(std::max(0.0, a.squaredNorm() * b.squaredNorm() - a.dot(b) * a.dot(b)));
      r.area += jac;
      const double dn = ret.image_distance(d);
      const Point u = (img - img.dot(ret.p) * ret.p).normalized();
      Eigen::Matrix4d m;
      m << a, b, -std::sin(dn) * ret.p + std::cos(dn) * u, img;
      r.signed_area += m.determinant();
      r.base_area += g.jac;
      r.max_node_excess = std::max(r.max_node_excess, jac - g.jac);
      r.max_sphere_residual =
          std::max(r.max_sphere_residual, std::abs(sphere_distance(ret.p, img) - ret.image_distance(d)));
      if (s == 1.0)
        r.max_sphere_residual = std::max(r.max_sphere_residual, std::abs(sphere_distance(ret.p, img) - ret.lambda));
    }
  }
  if (!errors.empty()) throw errors.front();
  const double h2 = fam.quad().step() * fam.quad().step();
  for (const auto& r : rows) {
    out.area += r.area;
    out.signed_area += r.signed_area;
    out.base_area += r.base_area;
    out.max_node_excess = std::max(out.max_node_excess, r.max_node_excess);
    out.max_sphere_residual = std::max(out.max_sphere_residual, r.max_sphere_residual);
    out.excluded += r.excluded;
  }
  out.area *= h2;
  out.signed_area *= h2;
  out.base_area *= h2;
  return out;
}

inline RetractedArea retracted_family_area(const Link& link, const Point& p, double z, double s,
                                           const QuadratureSpec& quad) {
  return retracted_family_area(CanonicalFamily(link, quad), p, z, s);
}

// ---------------------------------------------------------------------------
// Min-max family on I^5.

/// Orientation-preserving homeomorphism of the cube I^4 = [0,1]^4 onto the
/// closed ball of radius 2 (radial stretch about the cube center).
inline Point cube_to_ball2(const Point& x) { return 2.0 * cube_to_ball(2.0 * x - Point::Constant(1.0)); }

enum class SurfaceKind { kZero, kFamily, kRetracted, kRoundSphere };

inline const char* to_string(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::kZero: return "zero";
    case SurfaceKind::kFamily: return "family";
    case SurfaceKind::kRetracted: return "retracted";
    case SurfaceKind::kRoundSphere: return "round-sphere";
  }
  return "?";
}

struct MinMaxSurface {
  Point x = Point::Zero();
  double t = 0.0;
  /// f(x) in the closed ball of radius 2.
  Point v = Point::Zero();
  SurfaceKind kind = SurfaceKind::kZero;
  double area = 0.0;
  /// Round spheres and retracted members: center p = v/|v|, sphere radius r(t).
  Point center = Point::Zero();
  double sphere_radius = 0.0;
  /// Retracted members: retraction time |v| - 1.
  double retraction_time = 0.0;
  /// For round spheres evaluated through the grid route: |signed area| of
  /// the retracted grid and maximal distance of image nodes from the sphere.
  double grid_area = std::numeric_limits<double>::quiet_NaN();
  double sphere_residual = std::numeric_limits<double>::quiet_NaN();
};

/// Member Phi(x,t) of the min-max family. Boundary points of the cube give
/// the round sphere of radius r(t) about f(x)/|f(x)|, with analytic area;
/// set verify_spheres to also evaluate them through the retracted grid.
inline MinMaxSurface minmax_surface(const CanonicalFamily& fam, const Point& x, double t, bool verify_spheres = false) {
  for (int i = 0; i < 4; ++i)
    if (x[i] < -1e-12 || x[i] > 1.0 + 1e-12) throw Error(ErrorCode::kDomain, "x must lie in the unit cube");
  if (t < 0.0 || t > 1.0) throw Error(ErrorCode::kDomain, "t must lie in [0, 1]");
  MinMaxSurface out;
  out.x = x;
  out.t = t;
  out.v = cube_to_ball2(x);
  const double nv = out.v.norm();
  if (t <= 0.0 || t >= 1.0) {
    out.kind = SurfaceKind::kZero;
    return out;
  }
  if (nv <= 1.0) {
    out.kind = SurfaceKind::kFamily;
    out.area = fam.area(family_coeffs(out.v, t)).area;
    return out;
  }
  out.center = out.v / nv;
  out.sphere_radius = support_radius(t, fam.link().alpha());
  out.retraction_time = std::min(1.0, nv - 1.0);
  if (nv >= 2.0 - 1e-12) {
    out.kind = SurfaceKind::kRoundSphere;
    out.retraction_time = 1.0;
    out.area = geodesic_sphere_area(out.sphere_radius);
    if (verify_spheres) {
      const RetractedArea ra = retracted_family_area(fam, out.center, t, 1.0);
      out.grid_area = std::abs(ra.signed_area);
      out.sphere_residual = ra.max_sphere_residual;
    }
    return out;
  }
  out.kind = SurfaceKind::kRetracted;
  out.area = retracted_family_area(fam, out.center, t, out.retraction_time).area;
  return out;
}

}  // namespace mobius
