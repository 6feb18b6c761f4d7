#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace cpmol;
using cpmol::testing::Gen;

namespace {

constexpr double kPi = std::numbers::pi;

// Point at normal offset h from the curve at parameter s.
Point off_curve(const ParametricCurve& c, double s, double h) {
  const Vec2 p = c.position(s);
  const Vec2 t = c.velocity(s).normalized();
  return {p.x() + h * t.y(), p.y() - h * t.x(), 0.0};
}

}  // namespace

TEST(ClosestPoint, CircleExamples) {
  const Surface c = Surface::circle();
  auto r = closest_point(c, Point(2, 0, 0));
  EXPECT_NEAR((r.cp - Point(1, 0, 0)).norm(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(r.dist, 1.0);
  r = closest_point(c, Point(0.5, 0.5, 0));
  EXPECT_NEAR(r.cp.x(), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(r.cp.y(), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(r.dist, 1.0 - std::sqrt(0.5), 1e-15);
  EXPECT_NEAR((*r.param)[0], kPi / 4, 1e-15);
}

TEST(ClosestPoint, CentreIsAmbiguous) {
  EXPECT_THROW(closest_point(Surface::circle(), Point::Zero()), AmbiguousClosestPoint);
  EXPECT_THROW(closest_point(Surface::sphere(), Point::Zero()), AmbiguousClosestPoint);
  EXPECT_THROW(closest_point(Surface::ellipse(2, 1), Point::Zero()), AmbiguousClosestPoint);
}

TEST(ClosestPoint, SphereExample) {
  const auto r = closest_point(Surface::sphere(2.0), Point(0, 0, 3));
  EXPECT_NEAR((r.cp - Point(0, 0, 2)).norm(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(r.dist, 1.0);
  EXPECT_NEAR((*r.param)[1], kPi / 2, 1e-12);
}

TEST(ClosestPoint, OutsideBandIsFlagged) {
  const Surface c = Surface::circle();
  EXPECT_TRUE(closest_point(c, Point(3, 0, 0), 0.5).outside_band);
  EXPECT_FALSE(closest_point(c, Point(1.2, 0, 0), 0.5).outside_band);
}

TEST(ClosestPoint, EllipseVertex) {
  const auto r = closest_point(Surface::ellipse(2, 1), Point(2.5, 0, 0));
  EXPECT_NEAR(r.cp.x(), 2.0, 1e-12);
  EXPECT_NEAR(r.cp.y(), 0.0, 1e-12);
  EXPECT_NEAR(r.dist, 0.5, 1e-12);
}

TEST(ClosestPoint, InvalidSurfaces) {
  EXPECT_THROW(Surface::circle(0.0), InvalidArgument);
  EXPECT_THROW(Surface::sphere(-1.0), InvalidArgument);
  EXPECT_THROW(Surface::ellipse(1.0, 0.0), InvalidArgument);
  EXPECT_THROW(Surface::parametric_curve("bad", ParametricCurve{}), InvalidArgument);
}

TEST(ClosestPoint, RetractionProperty) {
  Gen gen(11);
  const Surface surfaces[] = {Surface::circle(), Surface::sphere(), Surface::ellipse(2, 1), Surface::snowflake()};
  for (const Surface& s : surfaces) {
    const int dim = s.embedding_dim();
    const int count = s.get_if<ParametricCurve>() ? 2000 : 10000;
    for (int i = 0; i < count; ++i) {
      Point x;
      if (const auto* c = s.get_if<ParametricCurve>()) {
        const double h = s.name() == "snowflake" ? 0.02 : 0.05;
        x = off_curve(*c, gen.uniform(0, 2 * kPi), gen.uniform(-h, h));
      } else {
        x = gen.shell(0.7, 1.3, dim);
      }
      const Point y = closest_point(s, x).cp;
      const auto again = closest_point(s, y);
      ASSERT_LE((again.cp - y).norm(), 1e-10) << s.name();
      ASSERT_LE(again.dist, 1e-10) << s.name();
    }
  }
}

TEST(ClosestPoint, DistanceMinimalityOnCurves) {
  Gen gen(12);
  for (const Surface& s : {Surface::ellipse(2, 1), Surface::snowflake()}) {
    const auto& c = *s.get_if<ParametricCurve>();
    const double h = s.name() == "snowflake" ? 0.02 : 0.08;
    for (int q = 0; q < 20; ++q) {
      const Point x = off_curve(c, gen.uniform(0, 2 * kPi), gen.uniform(-h, h));
      const double d = closest_point(s, x).dist;
      for (int k = 0; k < 1000; ++k) {
        const Vec2 p = c.position(gen.uniform(0, 2 * kPi));
        ASSERT_LE(d, (Vec2(x.x(), x.y()) - p).norm() + 1e-12);
      }
    }
  }
}

TEST(ClosestPoint, SnowflakeAgainstDenseSampling) {
  const Surface s = Surface::snowflake();
  const auto& c = *s.get_if<ParametricCurve>();
  constexpr int kDense = 1000000;
  std::vector<Vec2> pts(kDense);
  for (int i = 0; i < kDense; ++i) pts[i] = c.position(2 * kPi * i / kDense);
  Gen gen(13);
  for (int q = 0; q < 10; ++q) {
    const Point x = off_curve(c, gen.uniform(0, 2 * kPi), gen.uniform(-0.02, 0.02));
    const Vec2 x2(x.x(), x.y());
    double best = 1e300;
    for (const Vec2& p : pts) best = std::min(best, (x2 - p).squaredNorm());
    const double d = closest_point(s, x).dist;
    EXPECT_LE(d, std::sqrt(best) + 1e-12);
    EXPECT_NEAR(d, std::sqrt(best), 1e-7);
  }
}

TEST(SampleSurface, CircleAngles) {
  const auto s = sample_surface(Surface::circle(), 4);
  ASSERT_EQ(s.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(s[i].param[0], i * kPi / 2, 1e-15);
  EXPECT_NEAR((s[1].point - Point(0, 1, 0)).norm(), 0.0, 1e-15);
}

TEST(SampleSurface, SphereGrid) {
  const auto s = sample_surface(Surface::sphere(), 36);
  ASSERT_EQ(s.size(), 36u);
  for (const auto& x : s) {
    EXPECT_GT(x.param[0], -kPi);
    EXPECT_LE(x.param[0], kPi + 1e-15);
    EXPECT_GT(x.param[1], -kPi / 2);
    EXPECT_LT(x.param[1], kPi / 2);
  }
}

TEST(SampleSurface, PointsAreOnTheSurface) {
  for (const Surface& s : {Surface::circle(2.0), Surface::sphere(), Surface::ellipse(2, 1), Surface::snowflake()}) {
    for (const auto& x : sample_surface(s, 400)) EXPECT_LE(closest_point(s, x.point).dist, 1e-12) << s.name();
  }
}

TEST(SampleSurface, ZeroCountRejected) { EXPECT_THROW(sample_surface(Surface::circle(), 0), InvalidArgument); }

TEST(MeanCurvature, Examples) {
  EXPECT_DOUBLE_EQ(exact_mean_curvature(Surface::circle(), Point(1, 0, 0)), 1.0);
  EXPECT_DOUBLE_EQ(exact_mean_curvature(Surface::sphere(), Point(0, 0, 1)), 2.0);
  EXPECT_DOUBLE_EQ(exact_mean_curvature(Surface::sphere(2.0), Point(0, 0, 2)), 1.0);
  EXPECT_NEAR(exact_mean_curvature(Surface::ellipse(2, 1), Point(2, 0, 0)), 2.0, 1e-10);
  EXPECT_NEAR(exact_mean_curvature(Surface::ellipse(2, 1), Point(0, 1, 0)), 0.25, 1e-10);
  EXPECT_THROW(exact_mean_curvature(Surface::mesh(make_octahedron()), Point(1, 0, 0)), Unsupported);
}

TEST(MeanCurvature, EllipseFormulaAgainstFiniteDifferences) {
  // curvature from a central-difference discretization of the position only
  const double a = 2.0, b = 1.0, h = 1e-4;
  Gen gen(14);
  for (int i = 0; i < 50; ++i) {
    const double s = gen.uniform(0, 2 * kPi);
    auto pos = [&](double t) { return Vec2(a * std::cos(t), b * std::sin(t)); };
    const Vec2 d1 = (pos(s + h) - pos(s - h)) / (2 * h);
    const Vec2 d2 = (pos(s + h) - 2 * pos(s) + pos(s - h)) / (h * h);
    const double fd = std::abs(d1.x() * d2.y() - d1.y() * d2.x()) / std::pow(d1.norm(), 3);
    const double formula = a * b / std::pow(a * a * std::sin(s) * std::sin(s) + b * b * std::cos(s) * std::cos(s), 1.5);
    EXPECT_NEAR(formula, fd, 1e-6);
    EXPECT_NEAR(curve_curvature(*Surface::ellipse(a, b).get_if<ParametricCurve>(), s), formula, 1e-12);
  }
}

TEST(SurfacePoint, MeshHasNoParameterization) {
  EXPECT_THROW(surface_point(Surface::mesh(make_cube()), Vec2::Zero()), Unsupported);
}
