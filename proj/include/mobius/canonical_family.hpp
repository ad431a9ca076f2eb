#pragma once

#include <limits>
#include <optional>

#include "mobius/conformal.hpp"
#include "mobius/energy.hpp"

namespace mobius {

/// Parameter (v, z) of the canonical family with its derived coefficients.
///
/// Interior (|v| < 1):
///   b(v,z) = (2z - 1) / ((1 - |v|^2 + z)(1 - z)),  a = 1 + (1 - |v|^2) b,
///   c(v) = v / (1 - |v|^2).
/// Boundary (|v| = 1): b(z) = (2z - 1) / (z (1 - z)) and a = 1.
/// z in {0, 1} gives the zero surface.
struct FamilyPoint {
  Point v = Point::Zero();
  double z = 0.5;
  double a = 1.0;
  double b = 0.0;
  Point c = Point::Zero();
  bool boundary = false;
  bool zero_surface = false;
};

inline double family_b(const Point& v, double z) {
  const double q = 1.0 - v.squaredNorm();
  return (2.0 * z - 1.0) / ((q + z) * (1.0 - z));
}

inline double family_a(const Point& v, double z) { return 1.0 + (1.0 - v.squaredNorm()) * family_b(v, z); }

inline FamilyPoint family_coeffs(const Point& v, double z) {
  if (v.norm() > 1.0 + 1e-9) throw Error(ErrorCode::kDomain, "family parameter needs |v| <= 1");
  if (!(z >= 0.0 && z <= 1.0)) throw Error(ErrorCode::kDomain, "family parameter needs 0 <= z <= 1");
  FamilyPoint fp;
  fp.z = z;
  fp.boundary = v.norm() >= 1.0 - 1e-9;
  fp.v = fp.boundary ? Point(v.normalized()) : v;
  if (z <= 0.0 || z >= 1.0) {
    fp.zero_surface = true;
    fp.a = fp.b = 0.0;
    return fp;
  }
  if (fp.boundary) {
    fp.b = boundary_b(z);
    fp.a = 1.0;
  } else {
    fp.b = family_b(fp.v, z);
    fp.a = family_a(fp.v, z);
    fp.c = fp.v / (1.0 - fp.v.squaredNorm());
  }
  return fp;
}

/// Radius of the geodesic ball excluded from the support of C(p, z), with
/// c = alpha / 4: r(z) = arccos(b(z) / sqrt(b(z)^2 + c^2)).
inline double support_radius(double z, double alpha) {
  if (z <= 0.0) return kPi;
  if (z >= 1.0) return 0.0;
  if (z == 0.5) return kPi / 2.0;
  const double c = alpha / 4.0, b = boundary_b(z);
  return std::acos(clamp_unit(b / std::sqrt(b * b + c * c)));
}

/// Geodesic distance on S^3.
inline double sphere_distance(const Point& p, const Point& x) { return std::acos(clamp_unit(p.dot(x))); }

/// Quadrature summary of one family member g_(v,z) on an N x N grid.
struct SurfaceGrid {
  FamilyPoint params;
  int n = 0;
  /// Trapezoid sum of |Jac g|.
  double area = 0.0;
  /// Trapezoid sum of a |(F o x)'| |(F o y)'| / (a |F o x - F o y|^2 + b^2).
  double upper = 0.0;
  /// Trapezoid sum of the energy integrand of the untransformed link.
  double energy = 0.0;
  double max_jac = 0.0;
  /// max(jac - bound) over nodes; nonpositive when the Jacobian estimate holds.
  double max_jacobian_excess = -std::numeric_limits<double>::infinity();
  /// max(jac - upper) and max(upper - energy density) over nodes.
  double max_upper_excess = -std::numeric_limits<double>::infinity();
  double max_energy_excess = -std::numeric_limits<double>::infinity();
  int near_equality_nodes = 0;
  double max_near_equality_residual = 0.0;
  int excluded = 0;
  std::vector<GaussMapSample> nodes;

  const GaussMapSample& node(int i, int j) const { return nodes[static_cast<size_t>(i) * n + j]; }
};

/// The canonical family of a link on S^3, with both components pre-sampled
/// on a fixed quadrature grid.
class CanonicalFamily {
 public:
  struct Node {
    GaussMapSample sample;
    double upper = 0.0;
    double energy_density = 0.0;
    bool excluded = false;
  };

  /// Transformed curves x = F_v o gamma1 and y = a F_v o gamma2 - b v.
  struct Transformed {
    FamilyPoint fp;
    std::vector<Point> x, dx, fy, dfy, y, dy;
    std::vector<char> skip1, skip2;
  };

  CanonicalFamily(const Link& link, QuadratureSpec quad) : link_(link), quad_(quad) {
    if (!on_unit_sphere(link_, 1e-8))
      throw Error(ErrorCode::kDomain, "canonical family needs a link on the unit sphere S^3");
    a_ = link_.gamma1().sample(quad_.n);
    b_ = link_.gamma2().sample(quad_.n);
  }

  const Link& link() const { return link_; }
  const QuadratureSpec& quad() const { return quad_; }
  double energy() const {
    if (!energy_) energy_ = mobius_energy(link_, quad_);
    return *energy_;
  }

  Transformed transform(const FamilyPoint& fp) const {
    const int n = quad_.n;
    Transformed t;
    t.fp = fp;
    t.x.resize(n); t.dx.resize(n); t.fy.resize(n); t.dfy.resize(n); t.y.resize(n); t.dy.resize(n);
    t.skip1.assign(n, 0);
    t.skip2.assign(n, 0);
    if (fp.zero_surface) return t;
    const ConformalMap f = ConformalMap::inversion(fp.v);
    for (int i = 0; i < n; ++i) {
      if ((a_.pos[i] - fp.v).norm() < 1e-6) {
        t.skip1[i] = 1;
      } else {
        auto [x, dfx] = f.apply_with_differential(a_.pos[i]);
        t.x[i] = x;
        t.dx[i] = dfx * a_.vel[i];
      }
      if ((b_.pos[i] - fp.v).norm() < 1e-6) {
        t.skip2[i] = 1;
      } else {
        auto [y, dfy] = f.apply_with_differential(b_.pos[i]);
        t.fy[i] = y;
        t.dfy[i] = dfy * b_.vel[i];
        t.y[i] = fp.a * y - fp.b * fp.v;
        t.dy[i] = fp.a * t.dfy[i];
      }
    }
    return t;
  }

  Node node(const Transformed& t, int i, int j) const {
    Node out;
    if (t.fp.zero_surface || t.skip1[i] || t.skip2[j]) {
      out.excluded = !t.fp.zero_surface;
      return out;
    }
    out.sample = gauss_map_sample(t.x[i], t.dx[i], t.y[j], t.dy[j]);
    const double a = t.fp.a, b = t.fp.b;
    out.upper = a * t.dx[i].norm() * t.dfy[j].norm() / (a * (t.x[i] - t.fy[j]).squaredNorm() + b * b);
    out.energy_density = a_.vel[i].norm() * b_.vel[j].norm() / (a_.pos[i] - b_.pos[j]).squaredNorm();
    return out;
  }

  SurfaceGrid area(const FamilyPoint& fp, bool keep_nodes = false) const {
    const int n = quad_.n;
    SurfaceGrid grid;
    grid.params = fp;
    grid.n = n;
    if (keep_nodes) grid.nodes.resize(static_cast<size_t>(n) * n);
    if (fp.zero_surface) return grid;
    const Transformed t = transform(fp);
    std::vector<SurfaceGrid> rows(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      SurfaceGrid& r = rows[i];
      for (int j = 0; j < n; ++j) {
        const Node nd = node(t, i, j);
        if (nd.excluded) {
          ++r.excluded;
          continue;
        }
        const GaussMapSample& g = nd.sample;
        r.area += g.jac;
        r.upper += nd.upper;
        r.energy += nd.energy_density;
        r.max_jac = std::max(r.max_jac, g.jac);
        r.max_jacobian_excess = std::max(r.max_jacobian_excess, g.jac - g.bound);
        r.max_upper_excess = std::max(r.max_upper_excess, g.jac - nd.upper);
        r.max_energy_excess = std::max(r.max_energy_excess, nd.upper - nd.energy_density);
        if (g.near_equality()) {
          ++r.near_equality_nodes;
          r.max_near_equality_residual = std::max(r.max_near_equality_residual, g.scaled_residual());
        }
        if (keep_nodes) grid.nodes[static_cast<size_t>(i) * n + j] = g;
      }
    }
    const double h2 = quad_.step() * quad_.step();
    for (const auto& r : rows) {
      grid.area += r.area;
      grid.upper += r.upper;
      grid.energy += r.energy;
      grid.max_jac = std::max(grid.max_jac, r.max_jac);
      grid.max_jacobian_excess = std::max(grid.max_jacobian_excess, r.max_jacobian_excess);
      grid.max_upper_excess = std::max(grid.max_upper_excess, r.max_upper_excess);
      grid.max_energy_excess = std::max(grid.max_energy_excess, r.max_energy_excess);
      grid.near_equality_nodes += r.near_equality_nodes;
      grid.max_near_equality_residual = std::max(grid.max_near_equality_residual, r.max_near_equality_residual);
      grid.excluded += r.excluded;
    }
    grid.area *= h2;
    grid.upper *= h2;
    grid.energy *= h2;
    return grid;
  }

 private:
  Link link_;
  QuadratureSpec quad_;
  CurveSamples a_, b_;
  mutable std::optional<double> energy_;
};

inline GaussMapSample family_gauss_map(const Link& link, const FamilyPoint& fp, double s, double t) {
  if (!on_unit_sphere(link, 1e-8)) throw Error(ErrorCode::kDomain, "canonical family needs a link on S^3");
  if ((link.gamma1().eval(s) - fp.v).norm() < 1e-12 || (link.gamma2().eval(t) - fp.v).norm() < 1e-12)
    throw Error(ErrorCode::kSingularity, "a curve passes through v at the requested parameters");
  const ConformalMap f = ConformalMap::inversion(fp.v);
  auto [x, dfx] = f.apply_with_differential(link.gamma1().eval(s));
  auto [y, dfy] = f.apply_with_differential(link.gamma2().eval(t));
  return gauss_map_sample(x, dfx * link.gamma1().derivative(s), fp.a * y - fp.b * fp.v,
                          fp.a * (dfy * link.gamma2().derivative(t)));
}

inline SurfaceGrid family_area(const Link& link, const FamilyPoint& fp, const QuadratureSpec& quad,
                               bool keep_nodes = false) {
  return CanonicalFamily(link, quad).area(fp, keep_nodes);
}

struct SphereIdentityResiduals {
  /// | |x - D_{c,a} y|^2 - (a |x - y|^2 + b^2) | / (a |x - y|^2 + b^2), with x = F_v o gamma1(s), y = F_v o gamma2(t)
  double shifted = 0.0;
  /// | |x - y|^2 |gamma1 - v|^2 |gamma2 - v|^2 - |gamma1 - gamma2|^2 | / |gamma1 - gamma2|^2
  double inversion = 0.0;
};

/// Relative residuals of the two distance identities behind the area bound,
/// for interior v and a link on S^3.
inline SphereIdentityResiduals sphere_identity_residuals(const Link& link, const Point& v, double z, double s,
                                                         double t) {
  const FamilyPoint fp = family_coeffs(v, z);
  if (fp.boundary || fp.zero_surface) throw Error(ErrorCode::kDomain, "identities need |v| < 1 and 0 < z < 1");
  const Point p = link.gamma1().eval(s), q = link.gamma2().eval(t);
  const ConformalMap f = ConformalMap::inversion(fp.v);
  const Point x = f.apply(p), y = f.apply(q);
  const Point shifted = fp.a * (y - fp.c) + fp.c;
  SphereIdentityResiduals r;
  const double rhs = fp.a * (x - y).squaredNorm() + fp.b * fp.b;
  r.shifted = std::abs((x - shifted).squaredNorm() - rhs) / rhs;
  const double d2 = (p - q).squaredNorm();
  r.inversion = std::abs((x - y).squaredNorm() * (p - fp.v).squaredNorm() * (q - fp.v).squaredNorm() - d2) / d2;
  return r;
}

/// Family parameters for scans: Halton points of B^4 x (0,1), a fraction of
/// them pushed to the boundary sphere, plus the axis grid v = 0 x z_k.
inline std::vector<FamilyPoint> family_samples(int count, double boundary_fraction = 0.0, int axis_z = 9) {
  std::vector<FamilyPoint> out;
  out.reserve(count + axis_z);
  for (int k = 1; k <= axis_z; ++k) out.push_back(family_coeffs(Point::Zero(), double(k) / (axis_z + 1)));
  const int boundary_every = boundary_fraction > 0.0 ? std::max(1, int(std::lround(1.0 / boundary_fraction))) : 0;
  for (int i = 1; i <= count; ++i) {
    const auto h = halton5(static_cast<std::uint64_t>(i));
    Point v = cube_to_ball(Point(2 * h[0] - 1, 2 * h[1] - 1, 2 * h[2] - 1, 2 * h[3] - 1));
    if (boundary_every && i % boundary_every == 0 && v.norm() > 1e-6) v.normalize();
    const double z = std::clamp(h[4], 1e-3, 1.0 - 1e-3);
    out.push_back(family_coeffs(v, z));
  }
  return out;
}

struct JacobianBoundReport {
  double max_jac = 0.0;
  FamilyPoint argmax;
  /// 9 C1 C2 / alpha^2: the derivative bound 3C for each
  /// transformed component and the separation estimate with alpha.
  double a_priori_bound = 0.0;
  double alpha = 0.0;
  double speed1 = 0.0, speed2 = 0.0;
  long long evaluations = 0;
};

/// Maximum of |Jac g_(v,z)| over the given family parameters and an
/// st_nodes x st_nodes parameter grid.
inline JacobianBoundReport uniform_jacobian_bound(const Link& link, const std::vector<FamilyPoint>& params,
                                                  int st_nodes) {
  JacobianBoundReport r;
  CanonicalFamily fam(link, QuadratureSpec(st_nodes));
  r.alpha = link.alpha();
  r.speed1 = max_speed(link.gamma1());
  r.speed2 = max_speed(link.gamma2());
  r.a_priori_bound = 9.0 * r.speed1 * r.speed2 / (r.alpha * r.alpha);
  for (const auto& fp : params) {
    const SurfaceGrid g = fam.area(fp);
    r.evaluations += static_cast<long long>(st_nodes) * st_nodes;
    if (g.max_jac > r.max_jac) {
      r.max_jac = g.max_jac;
      r.argmax = fp;
    }
  }
  return r;
}

/// Parameters v in the closed ball from an axes^4 grid of the cube [-1,1]^4
/// pushed onto the ball by the radial stretch.
inline std::vector<Point> ball_grid(int axes) {
  std::vector<Point> out;
  for (int i0 = 0; i0 < axes; ++i0)
    for (int i1 = 0; i1 < axes; ++i1)
      for (int i2 = 0; i2 < axes; ++i2)
        for (int i3 = 0; i3 < axes; ++i3) {
          auto c = [&](int i) { return axes == 1 ? 0.0 : -1.0 + 2.0 * i / (axes - 1); };
          out.push_back(cube_to_ball(Point(c(i0), c(i1), c(i2), c(i3))));
        }
  return out;
}

inline double min_distance_to_link(const Link& link, const Point& p, int probes = 1024) {
  double d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < probes; ++j) {
    const double s = kTwoPi * j / probes;
    d = std::min({d, (link.gamma1().eval(s) - p).norm(), (link.gamma2().eval(s) - p).norm()});
  }
  return d;
}

inline void require_off_link(const Link& link, const Point& p, double min_dist) {
  if (std::abs(p.norm() - 1.0) > 1e-9) throw Error(ErrorCode::kDomain, "expected a unit vector");
  if (min_distance_to_link(link, p) < min_dist)
    throw Error(ErrorCode::kDomain, "point is closer than " + std::to_string(min_dist) + " to the link");
}

struct GreatSphereReport {
  double max_inner = 0.0;
  double area = 0.0;
  /// (1/4pi) * signed area of g on the great sphere <x, v> = 0.
  double degree = 0.0;
};

/// For unit v off the link, g_(v,1/2) maps into the great sphere <x,v> = 0.
inline GreatSphereReport great_sphere_check(const Link& link, const Point& v, const QuadratureSpec& quad) {
  require_off_link(link, v, 1e-4);
  CanonicalFamily fam(link, quad);
  const FamilyPoint fp = family_coeffs(v, 0.5);
  const SurfaceGrid grid = fam.area(fp, true);
  GreatSphereReport r;
  r.area = grid.area;
  double signed_area = 0.0;
  for (const auto& g : grid.nodes) {
    r.max_inner = std::max(r.max_inner, std::abs(g.g.dot(fp.v)));
    Eigen::Matrix4d m;
    m << g.dgds, g.dgdt, g.g, fp.v;
    signed_area += m.determinant();
  }
  r.degree = signed_area * quad.step() * quad.step() / (4.0 * kPi);
  return r;
}

struct ContainmentReport {
  double r = 0.0;
  /// Smallest signed distance of a node to the boundary of the annulus
  /// (negative when a node lies outside).
  double min_margin = std::numeric_limits<double>::infinity();
  /// max | <g,p> - b(z) / |F_p o x - L o y| |
  double max_identity_error = 0.0;
  /// max( |<g,p>| - |b| / sqrt(c^2 + b^2) )
  double max_bound_excess = -std::numeric_limits<double>::infinity();
  double max_abs_inner = 0.0;
  int nodes = 0;
  bool contained(double tol = 1e-6) const { return min_margin >= -tol; }
};

/// Checks supp C(p,z) within the closed hemisphere about p (z >= 1/2) or -p
/// (z <= 1/2) minus the geodesic ball of radius r(z).
inline ContainmentReport support_containment_check(const Link& link, const Point& p, double z,
                                                   const QuadratureSpec& quad) {
  require_off_link(link, p, 1e-4);
  ContainmentReport rep;
  rep.r = support_radius(z, link.alpha());
  const FamilyPoint fp = family_coeffs(p, z);
  if (fp.zero_surface) {
    rep.min_margin = 0.0;
    return rep;
  }
  CanonicalFamily fam(link, quad);
  const auto t = fam.transform(fp);
  const double c = link.alpha() / 4.0, b = fp.b;
  const double cap = std::abs(b) / std::sqrt(c * c + b * b);
  for (int i = 0; i < quad.n; ++i)
    for (int j = 0; j < quad.n; ++j) {
      const auto nd = fam.node(t, i, j);
      if (nd.excluded) continue;
      const Point& g = nd.sample.g;
      const double inner = g.dot(fp.v);
      const double d = sphere_distance(fp.v, g);
      const double margin = z >= 0.5 ? std::min(d - rep.r, kPi / 2 - d) : std::min(d - kPi / 2, rep.r - d);
      rep.min_margin = std::min(rep.min_margin, margin);
      rep.max_identity_error = std::max(rep.max_identity_error, std::abs(inner - b / (t.x[i] - t.y[j]).norm()));
      rep.max_bound_excess = std::max(rep.max_bound_excess, std::abs(inner) - cap);
      rep.max_abs_inner = std::max(rep.max_abs_inner, std::abs(inner));
      ++rep.nodes;
    }
  return rep;
}

/// Deterministic, roughly uniform set of points of S^3 (Hopf coordinates of
/// Halton points).
inline std::vector<Point> sphere_centers(int count) {
  std::vector<Point> out;
  for (int i = 1; i <= count; ++i) {
    const auto h = halton5(static_cast<std::uint64_t>(i));
    const double eta = std::asin(std::sqrt(h[0])), x1 = kTwoPi * h[1], x2 = kTwoPi * h[2];
    out.emplace_back(std::cos(eta) * std::cos(x1), std::cos(eta) * std::sin(x1), std::sin(eta) * std::cos(x2),
                     std::sin(eta) * std::sin(x2));
  }
  return out;
}

struct ConcentrationReport {
  std::vector<double> radii;
  /// Max over family points and centers of the Jacobian mass of g^-1(B_r(p)).
  std::vector<double> max_mass;
  std::vector<double> max_area;
};

inline ConcentrationReport concentration_scan(const Link& link, const std::vector<FamilyPoint>& params,
                                              const std::vector<double>& radii, const std::vector<Point>& centers,
                                              const QuadratureSpec& quad) {
  ConcentrationReport rep;
  rep.radii = radii;
  rep.max_mass.assign(radii.size(), 0.0);
  rep.max_area.assign(radii.size(), 0.0);
  CanonicalFamily fam(link, quad);
  const double h2 = quad.step() * quad.step();
  for (const auto& fp : params) {
    const SurfaceGrid grid = fam.area(fp, true);
    std::vector<std::vector<double>> mass(centers.size(), std::vector<double>(radii.size(), 0.0));
#pragma omp parallel for schedule(static)
    for (int c = 0; c < static_cast<int>(centers.size()); ++c)
      for (const auto& g : grid.nodes) {
        if (g.jac == 0.0) continue;
        const double d = sphere_distance(centers[c], g.g);
        for (size_t k = 0; k < radii.size(); ++k)
          if (d < radii[k]) mass[c][k] += g.jac * h2;
      }
    for (const auto& m : mass)
      for (size_t k = 0; k < radii.size(); ++k)
        if (m[k] > rep.max_mass[k]) {
          rep.max_mass[k] = m[k];
          rep.max_area[k] = grid.area;
        }
  }
  return rep;
}

}  // namespace mobius
