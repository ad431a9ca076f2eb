#include <gtest/gtest.h>

#include "mobius/canonical_family.hpp"
#include "oracles.hpp"

using namespace mobius;

namespace {

constexpr double kHopfEnergy = 2.0 * kPi * kPi;

/// Two great circles of S^3 with the second tilted towards the first;
/// separation sqrt(2 (1 - sin phi)).
Link tilted_great_circles(double sin_phi) {
  const double cos_phi = std::sqrt(1 - sin_phi * sin_phi);
  return Link(circle(Point::Zero(), Point(1, 0, 0, 0), Point(0, 1, 0, 0), 1.0, 4),
              circle(Point::Zero(), Point(sin_phi, 0, cos_phi, 0), Point(0, 0, 0, 1), 1.0, 4));
}

Point off_link_unit(const Link& l, Rng& rng, double min_dist = 0.05) {
  for (;;) {
    const Point p = rng.unit_vector4();
    if (min_distance_to_link(l, p) >= min_dist) return p;
  }
}

}  // namespace

TEST(Coefficients, HalfIsNeutral) {
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const FamilyPoint fp = family_coeffs(rng.ball_point4(0.99), 0.5);
    EXPECT_EQ(fp.b, 0.0);
    EXPECT_EQ(fp.a, 1.0);
  }
  const FamilyPoint bd = family_coeffs(Point(0, 0, 1, 0), 0.5);
  EXPECT_TRUE(bd.boundary);
  EXPECT_EQ(bd.b, 0.0);
}

TEST(Coefficients, InteriorThreeQuarters) {
  const FamilyPoint fp = family_coeffs(Point::Zero(), 0.75);
  EXPECT_NEAR(fp.b, 8.0 / 7.0, 1e-15);
  EXPECT_NEAR(fp.a, 15.0 / 7.0, 1e-15);
  EXPECT_FALSE(fp.boundary);
}

TEST(Coefficients, BoundaryThreeQuarters) {
  const FamilyPoint fp = family_coeffs(Point(1, 0, 0, 0), 0.75);
  EXPECT_TRUE(fp.boundary);
  EXPECT_NEAR(fp.b, 8.0 / 3.0, 1e-15);
  EXPECT_EQ(fp.a, 1.0);
}

TEST(Coefficients, ScaleRelationAndMonotoneA) {
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const Point v = rng.ball_point4(0.99);
    double prev = -std::numeric_limits<double>::infinity();
    for (int k = 1; k < 1000; ++k) {
      const FamilyPoint fp = family_coeffs(v, k / 1000.0);
      EXPECT_DOUBLE_EQ(fp.a, 1.0 + (1.0 - v.squaredNorm()) * fp.b);
      EXPECT_GE(fp.a, prev);
      EXPECT_GT(fp.a, 0.0);
      prev = fp.a;
    }
  }
}

TEST(Coefficients, EndpointsAreZeroSurface) {
  EXPECT_TRUE(family_coeffs(Point(0.2, 0, 0, 0), 0.0).zero_surface);
  EXPECT_TRUE(family_coeffs(Point(0.2, 0, 0, 0), 1.0).zero_surface);
  const CanonicalFamily fam(hopf_link(), QuadratureSpec(16));
  EXPECT_EQ(fam.area(family_coeffs(Point::Zero(), 1.0)).area, 0.0);
}

TEST(FamilyGaussMap, HopfAtHalfIsPlainGaussMap) {
  Rng rng(3);
  const FamilyPoint fp = family_coeffs(Point::Zero(), 0.5);
  for (int i = 0; i < 50; ++i) {
    const double s = rng.uniform(0, kTwoPi), t = rng.uniform(0, kTwoPi);
    const GaussMapSample a = family_gauss_map(hopf_link(), fp, s, t), b = gauss_map(hopf_link(), s, t);
    EXPECT_LT((a.g - b.g).norm(), 1e-15);
    EXPECT_NEAR(a.jac, 0.5, 1e-14);
  }
}

TEST(FamilyGaussMap, TangentsMatchFiniteDifferences) {
  const Link l = perturbed_hopf_s3(3, 0.1);
  Rng rng(4);
  for (int i = 0; i < 256; ++i) {
    const FamilyPoint fp = family_coeffs(rng.ball_point4(0.8), rng.uniform(0.05, 0.95));
    const double s = rng.uniform(0, kTwoPi), t = rng.uniform(0, kTwoPi);
    const GaussMapSample m = family_gauss_map(l, fp, s, t);
    auto g = [&](double ss, double tt) { return family_gauss_map(l, fp, ss, tt).g; };
    const Point fs = oracle::central_difference([&](double u) { return Point(g(u, t)); }, s, 1e-5);
    const Point ft = oracle::central_difference([&](double u) { return Point(g(s, u)); }, t, 1e-5);
    const double scale = std::max(1.0, std::max(m.dgds.norm(), m.dgdt.norm()));
    EXPECT_LT((fs - m.dgds).norm() / scale, 1e-6);
    EXPECT_LT((ft - m.dgdt).norm() / scale, 1e-6);
  }
}

TEST(FamilyGaussMap, NeedsLinkOnSphere) {
  try {
    family_gauss_map(hopf_link_r3(), family_coeffs(Point::Zero(), 0.5), 0, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDomain);
  }
}

TEST(FamilyArea, HopfCliffordTorus) {
  const SurfaceGrid g = family_area(hopf_link(), family_coeffs(Point::Zero(), 0.5), QuadratureSpec(96), true);
  EXPECT_NEAR(g.area, kHopfEnergy, 1e-8);
  for (const auto& n : g.nodes) {
    EXPECT_NEAR(n.jac, 0.5, 1e-10);
    EXPECT_NEAR(n.g.norm(), 1.0, 1e-10);
  }
}

TEST(FamilyArea, HopfOffCentreZIsSmaller) {
  const SurfaceGrid g = family_area(hopf_link(), family_coeffs(Point::Zero(), 0.75), QuadratureSpec(96));
  EXPECT_LT(g.area, kHopfEnergy - 0.1);
}

TEST(FamilyArea, ChainHoldsNodewiseAndIntegrated) {
  const Link l = perturbed_hopf_s3(5, 0.15);
  const CanonicalFamily fam(l, QuadratureSpec(64));
  for (const auto& fp : family_samples(60, 0.2)) {
    if (fp.boundary && min_distance_to_link(l, fp.v) < 1e-2) continue;
    const SurfaceGrid g = fam.area(fp);
    EXPECT_LE(g.max_jacobian_excess, 1e-10);
    EXPECT_LE(g.max_upper_excess, 1e-10);
    EXPECT_LE(g.area, g.upper + 1e-6);
    EXPECT_LE(g.upper, fam.energy() + 1e-6);
    EXPECT_LE(g.max_near_equality_residual, 1e-4);
  }
}

TEST(FamilyArea, VanishesAtEndpoints) {
  const CanonicalFamily fam(hopf_link(), QuadratureSpec(64));
  Rng rng(6);
  for (int i = 0; i < 5; ++i) {
    const Point v = rng.ball_point4(0.9);
    double prev_lo = 1e9, prev_hi = 1e9;
    for (double e : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
      const double lo = fam.area(family_coeffs(v, e)).area, hi = fam.area(family_coeffs(v, 1 - e)).area;
      EXPECT_LT(lo, prev_lo);
      EXPECT_LT(hi, prev_hi);
      prev_lo = lo;
      prev_hi = hi;
    }
    EXPECT_LT(prev_lo, 1e-3);
    EXPECT_LT(prev_hi, 1e-3);
  }
}

TEST(FamilyArea, ContinuousUpToBoundary) {
  const Link l = perturbed_hopf_s3(7, 0.1);
  const CanonicalFamily fam(l, QuadratureSpec(96));
  Rng rng(7);
  for (int seq = 0; seq < 3; ++seq) {
    const Point p = off_link_unit(l, rng);
    const double z = rng.uniform(0.2, 0.8);
    const double target = fam.area(family_coeffs(p, z)).area;
    double last = 0.0;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) last = fam.area(family_coeffs((1 - eps) * p, z)).area;
    EXPECT_NEAR(last, target, 1e-3) << "sequence " << seq;
  }
}

TEST(SphereIdentities, ShiftedAndInversion) {
  Rng rng(8);
  const Link l = perturbed_hopf_s3(8, 0.1);
  for (int i = 0; i < 2000; ++i) {
    const auto r = sphere_identity_residuals(l, rng.ball_point4(0.95), rng.uniform(0.01, 0.99),
                                             rng.uniform(0, kTwoPi), rng.uniform(0, kTwoPi));
    EXPECT_LT(r.shifted, 1e-10);
    EXPECT_LT(r.inversion, 1e-10);
  }
}

TEST(JacobianBound, HopfScanIsFinite) {
  std::vector<FamilyPoint> params;
  for (const Point& v : ball_grid(5))
    for (int k = 1; k <= 9; ++k) {
      const FamilyPoint fp = family_coeffs(v, k / 10.0);
      if (fp.boundary && min_distance_to_link(hopf_link(), fp.v) < 1e-2) continue;
      params.push_back(fp);
    }
  const JacobianBoundReport r = uniform_jacobian_bound(hopf_link(), params, 32);
  EXPECT_TRUE(std::isfinite(r.max_jac));
  EXPECT_GT(r.max_jac, 0.0);
  EXPECT_NEAR(r.a_priori_bound, 4.5, 1e-9);
  EXPECT_LE(r.max_jac, r.a_priori_bound);
}

TEST(JacobianBound, CentreOfHopfIsHalf) {
  const JacobianBoundReport r = uniform_jacobian_bound(hopf_link(), {family_coeffs(Point::Zero(), 0.5)}, 64);
  EXPECT_NEAR(r.max_jac, 0.5, 1e-12);
}

TEST(JacobianBound, ProofBoundScalesWithInverseSquareSeparation) {
  const Link wide = tilted_great_circles(0.0), narrow = tilted_great_circles(0.75);
  EXPECT_NEAR(narrow.alpha(), wide.alpha() / 2, 1e-9);
  const auto a = uniform_jacobian_bound(wide, {family_coeffs(Point::Zero(), 0.5)}, 32);
  const auto b = uniform_jacobian_bound(narrow, {family_coeffs(Point::Zero(), 0.5)}, 32);
  EXPECT_NEAR(b.a_priori_bound / a.a_priori_bound, 4.0, 1e-6);
  EXPECT_LE(b.max_jac, b.a_priori_bound);
}

TEST(GreatSphere, HopfAnyPole) {
  Rng rng(9);
  for (int i = 0; i < 4; ++i) {
    const Point v = off_link_unit(hopf_link(), rng);
    const GreatSphereReport r = great_sphere_check(hopf_link(), v, QuadratureSpec(96));
    EXPECT_LT(r.max_inner, 1e-8);
    EXPECT_GE(r.area, 4 * kPi - 1e-4);
    EXPECT_NEAR(std::abs(r.degree), 1.0, 1e-3);
  }
}

TEST(GreatSphere, PerturbedLink) {
  const Link l = perturbed_hopf_s3(10, 0.1);
  Rng rng(10);
  const GreatSphereReport r = great_sphere_check(l, off_link_unit(l, rng), QuadratureSpec(96));
  EXPECT_LT(r.max_inner, 1e-8);
  EXPECT_GE(r.area, 4 * kPi - 1e-4);
}

TEST(GreatSphere, PoleOnLinkRejected) {
  try {
    great_sphere_check(hopf_link(), Point(1, 0, 0, 0), QuadratureSpec(16));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDomain);
  }
}

TEST(SupportRadius, Endpoints) {
  const double a = std::sqrt(2.0);
  EXPECT_EQ(support_radius(0.0, a), kPi);
  EXPECT_EQ(support_radius(0.5, a), kPi / 2);
  EXPECT_EQ(support_radius(1.0, a), 0.0);
}

TEST(SupportRadius, HopfThreeQuarters) {
  const double expected = std::acos((8.0 / 3.0) / std::sqrt(64.0 / 9.0 + 1.0 / 8.0));
  EXPECT_NEAR(support_radius(0.75, std::sqrt(2.0)), expected, 1e-15);
  EXPECT_NEAR(expected, 0.1319, 1e-4);
}

TEST(SupportRadius, MonotoneAndContinuous) {
  double prev = kPi;
  for (int k = 1; k <= 1000; ++k) {
    const double r = support_radius(k / 1000.0, std::sqrt(2.0));
    EXPECT_LE(r, prev);
    EXPECT_LT(prev - r, 0.1);
    prev = r;
  }
}

TEST(Containment, HopfAtSevenTenths) {
  Rng rng(11);
  for (int i = 0; i < 3; ++i) {
    const ContainmentReport c = support_containment_check(hopf_link(), off_link_unit(hopf_link(), rng), 0.7,
                                                          QuadratureSpec(256));
    EXPECT_TRUE(c.contained());
    EXPECT_GE(c.min_margin, -1e-10);
    EXPECT_LT(c.max_identity_error, 1e-10);
    EXPECT_LE(c.max_bound_excess, 1e-12);
  }
}

TEST(Containment, HalfIsGreatSphere) {
  Rng rng(12);
  const ContainmentReport c =
      support_containment_check(hopf_link(), off_link_unit(hopf_link(), rng), 0.5, QuadratureSpec(64));
  EXPECT_LT(c.max_abs_inner, 1e-8);
}

TEST(Containment, MirroredBelowHalf) {
  const Link l = perturbed_hopf_s3(12, 0.1);
  Rng rng(13);
  const Point p = off_link_unit(l, rng);
  for (double z : {0.1, 0.3}) {
    const ContainmentReport c = support_containment_check(l, p, z, QuadratureSpec(96));
    EXPECT_GE(c.min_margin, -1e-10);
    EXPECT_LT(c.max_identity_error, 1e-10);
  }
}

TEST(Concentration, HopfSmallBallIsFlatDisc) {
  const double r = 0.1;
  const auto rep = concentration_scan(hopf_link(), {family_coeffs(Point::Zero(), 0.5)}, {r}, sphere_centers(64),
                                      QuadratureSpec(384));
  EXPECT_LE(rep.max_mass[0], kPi * r * r * 1.1);
  // Brute-force count around a point of the Clifford torus.
  const Link hopf = hopf_link();
  const Point c = gauss_map(hopf, 0.0, kPi / 2).g;
  const int n = 384;
  const double h = kTwoPi / n;
  double mass = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (sphere_distance(c, gauss_map(hopf, i * h, j * h).g) < r) mass += 0.5 * h * h;
  EXPECT_NEAR(mass, kPi * r * r, 0.1 * kPi * r * r);
}

TEST(Concentration, HalvingRadiusHalvesMass) {
  const Link l = perturbed_hopf_s3(14, 0.1);
  const auto rep = concentration_scan(l, family_samples(6), {0.4, 0.2, 0.1, 0.05}, sphere_centers(64),
                                      QuadratureSpec(128));
  for (size_t k = 1; k < rep.radii.size(); ++k) EXPECT_GE(rep.max_mass[k - 1], 2.0 * rep.max_mass[k]);
}

TEST(Concentration, WholeSphereIsTotalArea) {
  const auto params = std::vector<FamilyPoint>{family_coeffs(Point(0.3, 0, 0, 0), 0.6)};
  const auto rep = concentration_scan(hopf_link(), params, {kPi + 0.01}, sphere_centers(4), QuadratureSpec(64));
  const double area = family_area(hopf_link(), params[0], QuadratureSpec(64)).area;
  EXPECT_NEAR(rep.max_mass[0], area, 1e-10 * area);
}
