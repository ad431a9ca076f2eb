#include <gtest/gtest.h>

#include "mobius/canonical_family.hpp"
#include "mobius/optimizer.hpp"
#include "oracles.hpp"

using namespace mobius;

namespace {

Point random_on_sphere(Rng& rng) { return rng.unit_vector4(); }

double max_rel_diff(const Eigen::Matrix4d& a, const Eigen::Matrix4d& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

Eigen::Matrix4d fd_differential(const ConformalMap& m, const Point& x, double h = 1e-5) {
  Eigen::Matrix4d out;
  for (int k = 0; k < 4; ++k) {
    const Point e = Point::Unit(k);
    out.col(k) = (m.apply(x + h * e) - m.apply(x - h * e)) / (2 * h);
  }
  return out;
}

}  // namespace

TEST(Apply, InversionAtOriginFixesUnitSphere) {
  Rng rng(1);
  const ConformalMap f = ConformalMap::inversion(Point::Zero());
  for (int i = 0; i < 50; ++i) {
    const Point x = random_on_sphere(rng);
    EXPECT_LT((f.apply(x) - x).norm(), 1e-15);
  }
}

TEST(Apply, UnitDilationIsIdentity) {
  const ConformalMap d = ConformalMap::dilation(Point(1, 2, 3, 4), 1.0);
  EXPECT_LT((d.apply(Point(0.3, -1, 2, 5)) - Point(0.3, -1, 2, 5)).norm(), 1e-15);
}

TEST(Apply, InversionCenterIsSingular) {
  try {
    ConformalMap::inversion(Point(0.1, 0, 0, 0)).apply(Point(0.1, 0, 0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularity);
  }
}

TEST(ImageSphere, OriginAndHalf) {
  const ImageSphere o = image_sphere(Point::Zero());
  EXPECT_EQ(o.center, Point::Zero());
  EXPECT_EQ(o.radius, 1.0);
  const ImageSphere h = image_sphere(Point(0.5, 0, 0, 0));
  EXPECT_NEAR((h.center - Point(2.0 / 3, 0, 0, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(h.radius, 4.0 / 3, 1e-15);
  Rng rng(2);
  const ConformalMap f = ConformalMap::inversion(Point(0.5, 0, 0, 0));
  for (int i = 0; i < 20; ++i) EXPECT_NEAR((f.apply(random_on_sphere(rng)) - h.center).norm(), h.radius, 1e-12);
}

TEST(ImageSphere, RandomCenters) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Point v = rng.ball_point4(0.95);
    const ImageSphere s = image_sphere(v);
    const Point x = random_on_sphere(rng);
    EXPECT_NEAR((ConformalMap::inversion(v).apply(x) - s.center).norm(), s.radius, 1e-10 * s.radius);
  }
}

TEST(ImageSphere, NearBoundaryRejected) {
  try {
    image_sphere(Point(1, 0, 0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDomain);
  }
}

TEST(BoundaryMap, PlaneOffset) {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Point v = random_on_sphere(rng), x = random_on_sphere(rng);
    const double z = rng.uniform(0.01, 0.99);
    EXPECT_LT(std::abs(boundary_map_plane_check(v, z, x)), 1e-10 * std::max(1.0, std::abs(boundary_b(z))));
  }
}

TEST(BoundaryMap, HalfHasOffsetMinusHalf) {
  EXPECT_EQ(boundary_b(0.5), 0.0);
  const Point v(0, 0, 0, 1), x(1, 0, 0, 0);
  EXPECT_NEAR(ConformalMap::boundary(v, 0.5).apply(x).dot(v), -0.5, 1e-15);
}

TEST(BoundaryMap, OffsetDivergesMonotonically) {
  const Point v(0, 1, 0, 0), x(1, 0, 0, 0);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 1000; ++k) {
    const double z = 0.5 + 0.5 * k / 1000.0;
    const double offset = ConformalMap::boundary(v, z).apply(x).dot(v);
    EXPECT_LT(offset, prev);
    prev = offset;
  }
  EXPECT_LT(prev, -400.0);
}

TEST(BoundaryMap, PointAtCenterSingular) {
  try {
    boundary_map_plane_check(Point(1, 0, 0, 0), 0.3, Point(1, 0, 0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularity);
  }
}

TEST(Differential, MatchesFiniteDifferences) {
  Rng rng(5);
  for (int i = 0; i < 30; ++i) {
    const Point v = rng.ball_point4(0.9), u = random_on_sphere(rng);
    const ConformalMap maps[] = {
        ConformalMap::inversion(v),
        ConformalMap::dilation(rng.ball_point4(1.0), rng.uniform(0.2, 3.0)),
        ConformalMap::boundary(u, rng.uniform(0.05, 0.95)),
        ConformalMap::compose({ConformalMap::inversion(v), ConformalMap::dilation(v, 1.7),
                               ConformalMap::inversion(Point(0, 0, 0, 0))}),
    };
    const Point x = 1.5 * random_on_sphere(rng);
    for (const auto& m : maps) EXPECT_LT(max_rel_diff(fd_differential(m, x), m.differential(x)), 1e-6);
  }
}

TEST(Differential, CompositionIsProductOfMembers) {
  const ConformalMap a = ConformalMap::inversion(Point(0.2, 0.1, 0, 0));
  const ConformalMap b = ConformalMap::dilation(Point(0, 1, 0, 0), 2.5);
  const ConformalMap ab = ConformalMap::compose({a, b});
  const Point x(0.7, -0.3, 0.4, 0.2);
  EXPECT_LT(max_rel_diff(ab.differential(x), b.differential(a.apply(x)) * a.differential(x)), 1e-14);
  EXPECT_LT((ab.apply(x) - b.apply(a.apply(x))).norm(), 1e-14);
}

TEST(Pushforward, IdentityKeepsCurve) {
  const Curve c = perturbed_hopf_r3(1, 0.1).gamma1();
  const Curve p = pushforward_curve(ConformalMap::identity(), c);
  for (int j = 0; j < 64; ++j) EXPECT_LT((p.eval(0.1 * j) - c.eval(0.1 * j)).norm(), 1e-10);
}

TEST(Pushforward, ImageMatchesPointwise) {
  const Curve c = perturbed_hopf_r3(2, 0.1).gamma1();
  const ConformalMap f = ConformalMap::inversion(Point(0.3, -0.2, 0.5, 0));
  const Curve p = pushforward_curve(f, c);
  for (int j = 0; j < 500; ++j) {
    const double s = kTwoPi * (j + 0.25) / 500;
    EXPECT_LT((p.eval(s) - f.apply(c.eval(s))).norm(), 1e-8);
  }
}

TEST(Pushforward, DoubleInversionKeepsEnergy) {
  const Link l = perturbed_hopf_r3(3, 0.1);
  const Point v(0.2, 0.1, -0.3, 0);
  const ConformalMap ff = ConformalMap::compose({ConformalMap::inversion(v), ConformalMap::inversion(v)});
  const Link img = pushforward_link(ff, l);
  EXPECT_NEAR(mobius_energy(img, QuadratureSpec(256)), mobius_energy(l, QuadratureSpec(256)),
              1e-6 * mobius_energy(l, QuadratureSpec(256)));
}

TEST(Pushforward, CirclesStayCircles) {
  const Curve c = circle(Point(0.2, 0, 0, 0), Point(1, 0, 0, 0), Point(0, 0.6, 0.8, 0), 1.3);
  const Curve img = pushforward_curve(ConformalMap::inversion(Point(0.1, 0.4, -0.2, 0)), c);
  EXPECT_LT(fit_circle(img, 512).residual, 1e-6);
}

TEST(Pushforward, CenterOnCurveSingular) {
  const Curve c = circle(Point::Zero(), Point(1, 0, 0, 0), Point(0, 1, 0, 0));
  try {
    pushforward_curve(ConformalMap::inversion(Point(1, 0, 0, 0)), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularity);
  }
}

TEST(Pushforward, EnergyInvariantUnderRandomInversions) {
  Rng rng(11);
  const Link l = perturbed_hopf_s3(4, 0.1);
  const QuadratureSpec q(128);
  const double e0 = mobius_energy(l, q);
  for (int i = 0; i < 5; ++i) {
    const Link img = pushforward_link(ConformalMap::inversion(rng.ball_point4(0.9)), l);
    const int modes = std::max(img.gamma1().modes(), img.gamma2().modes());
    EXPECT_LT(std::abs(mobius_energy(img, QuadratureSpec(std::max(128, 4 * modes))) - e0) / e0, 1e-6);
  }
}

TEST(InversionIdentity, ChordScaling) {
  Rng rng(12);
  const Link l = perturbed_hopf_s3(5, 0.1);
  for (int i = 0; i < 1000; ++i) {
    const auto r = sphere_identity_residuals(l, rng.ball_point4(0.95), rng.uniform(0.01, 0.99),
                                             rng.uniform(0, kTwoPi), rng.uniform(0, kTwoPi));
    EXPECT_LT(r.inversion, 1e-10);
  }
}

TEST(DerivativeBound, UnitCircleAboutOrigin) {
  const Curve c = circle(Point::Zero(), Point(1, 0, 0, 0), Point(0, 1, 0, 0));
  const DerivativeBoundReport r = derivative_bound_check(c, Point::Zero(), 256);
  EXPECT_NEAR(r.speed_bound, 1.0, 1e-12);
  EXPECT_LE(r.max_ratio, 3.0);
  EXPECT_TRUE(r.holds());
}

TEST(DerivativeBound, RatioEqualsSpeed) {
  // |D F_v w| = |w| / |x - v|^2 and |F_v x| = 1 / |x - v|, so the ratio is
  // exactly |x'| at every sample, whatever v is.
  const Curve c = perturbed_hopf_r3(6, 0.2).gamma1();
  for (const Point& v : {Point(100, 0, 0, 0), Point(0.1, 0.2, 0.3, 0), Point(0, 0, 0, 2)}) {
    const DerivativeBoundReport r = derivative_bound_check(c, v, 512);
    double peak = 0.0;
    for (int j = 0; j < 512; ++j) peak = std::max(peak, c.derivative(kTwoPi * (j + 0.5) / 512).norm());
    EXPECT_NEAR(r.max_ratio, peak, 1e-8 * peak);
    EXPECT_TRUE(r.holds());
  }
}

TEST(DerivativeBound, ScalesWithSpeed) {
  const Curve c = circle(Point::Zero(), Point(1, 0, 0, 0), Point(0, 1, 0, 0));
  const Curve fast = Curve(3, c.with_modes(2).cos_coeffs(), c.with_modes(2).sin_coeffs());
  // Double the parameter speed: x(2s).
  Curve twice(3, 2);
  twice.cos_coeffs().col(2) = c.cos_coeffs().col(1);
  twice.sin_coeffs().col(2) = c.sin_coeffs().col(1);
  const Curve t2(3, twice.cos_coeffs(), twice.sin_coeffs());
  const Point v(0.1, 0.2, 0.3, 0);
  const auto a = derivative_bound_check(fast, v, 512), b = derivative_bound_check(t2, v, 512);
  EXPECT_NEAR(b.speed_bound, 2 * a.speed_bound, 1e-12);
  EXPECT_NEAR(b.max_ratio, 2 * a.max_ratio, 1e-8);
}

TEST(DerivativeBound, SamplesAtCenterExcluded) {
  const Curve c = circle(Point::Zero(), Point(1, 0, 0, 0), Point(0, 1, 0, 0));
  const Point v = c.eval(kTwoPi * 0.5 / 64);
  const DerivativeBoundReport r = derivative_bound_check(c, v, 64);
  EXPECT_EQ(r.excluded, 1);
  EXPECT_TRUE(std::isfinite(r.max_ratio));
}
