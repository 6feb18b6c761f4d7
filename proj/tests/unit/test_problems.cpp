#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"

using namespace cpmol;
using cpmol::testing::Gen;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(ExactSolutions, HeatCircle) {
  EXPECT_DOUBLE_EQ(exact_heat_circle(0.0, 0.3), std::cos(0.3) + std::cos(0.9));
  EXPECT_NEAR(exact_heat_circle(0.5, 0.0), 0.6176397, 5e-8);
  for (double t : {0.0, 0.2, 1.0}) EXPECT_NEAR(exact_heat_circle(t, kPi / 2), 0.0, 1e-15);
}

TEST(ExactSolutions, HeatSphereClosedForm) {
  EXPECT_DOUBLE_EQ(exact_heat_sphere(0.0, 1.0, 0.2), std::cos(0.7));
  EXPECT_NEAR(exact_heat_sphere(0.5, 0.0, 0.0), 0.3228446, 5e-8);
  EXPECT_EQ(exact_heat_sphere(0.3, -2.0, 0.4), exact_heat_sphere(0.3, 1.5, 0.4));
}

TEST(ExactSolutions, Biharmonic) {
  EXPECT_DOUBLE_EQ(exact_biharmonic_circle(0.0, 0.4), std::cos(0.4) + std::cos(1.2));
  EXPECT_NEAR(exact_biharmonic_circle(0.1, 0.0), 0.9051410, 5e-8);
  // decay exponents of modes 1 and 3 are 1 and 81
  const double t = 0.01;
  const double r3 = -std::log(exact_biharmonic_circle(t, 0.0) - std::exp(-t)) / t;
  EXPECT_NEAR(r3, 81.0, 1e-9);
}

TEST(HeatSphereSeries, InitialDataAndLongTimeMean) {
  for (double phi : {-1.2, 0.0, 0.7}) EXPECT_EQ(heat_sphere_series(0.0, phi), std::cos(phi + 0.5));
  // the surface mean of cos(phi + 1/2) survives: (1/2) int cos(phi+1/2) cos(phi) dphi = pi cos(1/2) / 4
  for (double phi : {-1.0, 0.3}) EXPECT_NEAR(heat_sphere_series(40.0, phi), kPi * std::cos(0.5) / 4.0, 1e-10);
  EXPECT_THROW(heat_sphere_series(-1.0, 0.0), InvalidArgument);
}

TEST(HeatSphereSeries, OddPartIsTheDegreeOneMode) {
  // cos(phi + 1/2) = cos(1/2) cos(phi) - sin(1/2) sin(phi); cos(phi) is even in z = sin(phi),
  // so the odd part of the solution is exactly -sin(1/2) e^{-2t} sin(phi)
  for (double t : {0.01, 0.1, 0.5}) {
    for (double phi : {0.2, 0.8, 1.3}) {
      const double odd = 0.5 * (heat_sphere_series(t, phi) - heat_sphere_series(t, -phi));
      EXPECT_NEAR(odd, -std::sin(0.5) * std::exp(-2.0 * t) * std::sin(phi), 1e-10);
    }
  }
}

TEST(HeatSphereSeries, ApproachesInitialDataAndDiffersFromClosedForm) {
  for (double phi : {-1.0, 0.0, 1.0}) EXPECT_NEAR(heat_sphere_series(0.005, phi), std::cos(phi + 0.5), 0.05);
  EXPECT_GT(std::abs(heat_sphere_series(0.5, 0.0) - exact_heat_sphere(0.5, 0.0, 0.0)), 0.3);
}

TEST(Problems, NamesRoundTrip) {
  for (ProblemKind k : {ProblemKind::heat_circle, ProblemKind::heat_sphere, ProblemKind::biharmonic_circle,
                        ProblemKind::poisson_circle, ProblemKind::gray_scott, ProblemKind::curvdiff_ellipse,
                        ProblemKind::curvdiff_snowflake, ProblemKind::gs_curvature}) {
    EXPECT_EQ(parse_problem(to_string(k)), k);
    const ProblemSpec spec = make_problem(k);
    const bool exact = k == ProblemKind::heat_circle || k == ProblemKind::heat_sphere ||
                       k == ProblemKind::biharmonic_circle || k == ProblemKind::poisson_circle;
    EXPECT_EQ(spec.has_exact(), exact) << to_string(k);
  }
  EXPECT_THROW(parse_problem("wave"), InvalidArgument);
  EXPECT_EQ(make_problem(ProblemKind::biharmonic_circle).p, 4);
}

TEST(Problems, DtPolicies) {
  EXPECT_DOUBLE_EQ(DtPolicy{}.resolve(0.1), 0.0025);
  EXPECT_DOUBLE_EQ((DtPolicy{DtPolicy::Kind::dx_over_4, 0.0}).resolve(0.1), 0.025);
  EXPECT_DOUBLE_EQ((DtPolicy{DtPolicy::Kind::fixed, 0.3}).resolve(0.1), 0.3);
  EXPECT_THROW((DtPolicy{DtPolicy::Kind::fixed, 0.0}).resolve(0.1), InvalidArgument);
}

TEST(Problems, SampleCounts) {
  EXPECT_EQ(default_sample_count(Surface::circle(), 0.1), 10u * 63u);
  EXPECT_EQ(default_sample_count(Surface::sphere(), 0.1), 64u * 64u);
}

TEST(RestrictAndError, SelfConsistency) {
  const ProblemSpec spec = make_problem(ProblemKind::heat_circle);
  double prev = 0.0;
  for (double dx : {0.1, 0.05}) {
    const BandedGrid g = build_band(spec.surface, dx, {1, 3});
    const Vector v = extend_to_band(g, [&](const SurfaceSample& s) { return spec.exact(0.3, s); });
    const ErrorReport r = restrict_and_error(g, v, spec.exact, 0.3, default_sample_count(spec.surface, dx));
    EXPECT_LE(r.max_err, 5.0 * std::pow(dx, 4));
    if (prev > 0.0) {
      EXPECT_GE(prev / r.max_err, std::pow(2.0, 3.5));
    }
    prev = r.max_err;
  }
}

TEST(RestrictAndError, ConstantsAndSampling) {
  const BandedGrid g = build_band(Surface::circle(), 0.1, {1, 3});
  const Vector c = Vector::Constant(static_cast<Eigen::Index>(g.size()), 2.0);
  EXPECT_LE(restrict_and_error(g, c, [](double, const SurfaceSample&) { return 2.0; }, 0.0, 100).max_err, 1e-14);
  const ProblemSpec spec = make_problem(ProblemKind::heat_circle);
  const Vector v = extend_to_band(g, [&](const SurfaceSample& s) { return spec.exact(0.0, s) + 0.01 * std::sin(s.param[0] * 7); });
  const double e1 = restrict_and_error(g, v, spec.exact, 0.0, 630).max_err;
  const double e2 = restrict_and_error(g, v, spec.exact, 0.0, 1260).max_err;
  EXPECT_NEAR(e1, e2, 0.01 * e2);
  Vector bad = c;
  bad[0] = std::nan("");
  EXPECT_THROW(restrict_and_error(g, bad, spec.exact, 0.0, 10), InvalidArgument);
  EXPECT_TRUE(restrict_and_error(g, c, spec.exact, 0.0, 10, true).max_err > 0.0);
}

TEST(RunProblem, HeatCircleSmall) {
  RunSettings rs;
  rs.dx = 0.1;
  const ErrorReport r = run_problem(make_problem(ProblemKind::heat_circle), rs);
  EXPECT_DOUBLE_EQ(r.dt, 0.0025);
  EXPECT_DOUBLE_EQ(r.gamma, 400.0);
  EXPECT_LT(r.max_err, 0.01);
  EXPECT_LE(r.growth, 1.0 + 1e-12);
  EXPECT_THROW(run_problem(make_problem(ProblemKind::gray_scott), rs), InvalidArgument);
}

TEST(RunProblem, SphereReportsBothForms) {
  RunSettings rs;
  rs.dx = 0.2;
  rs.scheme = Scheme::bdf2;
  rs.dt_policy = {DtPolicy::Kind::dx_over_4, 0.0};
  const ErrorReport r = run_problem(make_problem(ProblemKind::heat_sphere), rs);
  ASSERT_TRUE(r.stated_max_err.has_value());
  EXPECT_LT(r.max_err, 0.05);
  EXPECT_GT(*r.stated_max_err, 0.3);
}

TEST(GrayScott, ReactionExamples) {
  const GrayScottParams gs;
  EXPECT_DOUBLE_EQ(gs.F, 0.054);
  EXPECT_DOUBLE_EQ(gs.k, 0.063);
  auto [du, dv] = gray_scott_reaction(Vector::Ones(3), Vector::Zero(3), gs);
  EXPECT_EQ(du.lpNorm<Eigen::Infinity>(), 0.0);
  EXPECT_EQ(dv.lpNorm<Eigen::Infinity>(), 0.0);
  auto [du0, dv0] = gray_scott_reaction(Vector::Zero(2), Vector::Zero(2), gs);
  EXPECT_DOUBLE_EQ(du0[0], gs.F);
  EXPECT_DOUBLE_EQ(dv0[1], 0.0);
  Vector u(1), v(1);
  u << 0.5;
  v << 0.25;
  auto [du1, dv1] = gray_scott_reaction(u, v, gs);
  EXPECT_DOUBLE_EQ(du1[0], -0.5 * 0.0625 + gs.F * 0.5);
  EXPECT_DOUBLE_EQ(dv1[0], 0.5 * 0.0625 - (gs.F + gs.k) * 0.25);
}

TEST(GrayScott, HomogeneousStateIsFixedPoint) {
  const double dx = 0.2;
  const BandedGrid g = build_band(Surface::sphere(), dx, {1, 3});
  const SparseOperator E = extension_matrix(g, 3), L = laplacian(g);
  const auto n = static_cast<Eigen::Index>(g.size());
  const Vector nu = Vector::Constant(n, dx * dx / 9);
  const SparseMatrix Mu = gray_scott_operator(E, L, nu, recommended_gamma(3, dx));
  const SparseMatrix Mv = gray_scott_operator(E, L, 0.5 * nu, recommended_gamma(3, dx));
  auto [du, dv] = gray_scott_rhs(Vector::Ones(n), Vector::Zero(n), {}, Mu, Mv);
  EXPECT_LE(du.lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LE(dv.lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_THROW(gray_scott_rhs(Vector::Ones(n), Vector::Zero(3), {}, Mu, Mv), DimensionMismatch);
}

TEST(GrayScott, InitialDataIsSeededAndLocal) {
  const BandedGrid g = build_band(Surface::circle(), 0.1, {1, 3});
  const Point centre(1, 0, 0);
  const Vector a = gray_scott_initial(g, 0.05, centre, 0.5, 7);
  const Vector b = gray_scott_initial(g, 0.05, centre, 0.5, 7);
  const Vector c = gray_scott_initial(g, 0.05, centre, 0.5, 8);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  const auto n = static_cast<Eigen::Index>(g.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool inside = (g.cp(static_cast<std::size_t>(i)).cp - centre).norm() <= 0.5;
    if (!inside) {
      ASSERT_EQ(a[i], 1.0);
      ASSERT_EQ(a[i + n], 0.0);
    } else {
      ASSERT_GT(a[i], 0.95 - 1e-15);
      ASSERT_LE(a[i], 1.0);
      ASSERT_GE(a[i + n], 0.0);
      ASSERT_LT(a[i + n], 0.05);
    }
  }
}

TEST(GrayScott, ProblemDefaults) {
  const GrayScottProblem p = gray_scott_problem(Surface::sphere(), 0.2, {});
  EXPECT_DOUBLE_EQ(p.nu_u[0], 0.04 / 9);
  EXPECT_DOUBLE_EQ(p.nu_v[0], 0.02 / 9);
  EXPECT_DOUBLE_EQ(p.gamma, 6.0 / 0.04);
  EXPECT_EQ(p.w0.size(), 2 * static_cast<Eigen::Index>(p.grid.size()));
  GrayScottConfig cfg;
  cfg.curvature_ratio = true;
  const GrayScottProblem q = gray_scott_problem(Surface::ellipse(2, 1), 0.1, cfg);
  const Vector ratio = q.nu_v.cwiseQuotient(q.nu_u);
  EXPECT_NEAR(ratio.minCoeff(), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(ratio.maxCoeff(), 1.0, 1e-12);
}

TEST(ReferenceSolver, UnitCircleHeat) {
  const Surface c = Surface::circle();
  ParametricCurve circle{[](double s) { return Vec2(std::cos(s), std::sin(s)); },
                         [](double s) { return Vec2(-std::sin(s), std::cos(s)); },
                         [](double s) { return Vec2(-std::cos(s), -std::sin(s)); }};
  const CurveSolution sol = reference_curve_solver(
      circle, [](double) { return 1.0; }, [](double s) { return exact_heat_circle(0.0, s); }, 0.5, 1024);
  double err = 0.0;
  for (std::size_t i = 0; i < sol.s.size(); ++i) err = std::max(err, std::abs(sol.u[i] - exact_heat_circle(0.5, sol.s[i])));
  EXPECT_LE(err, 1e-6);
  EXPECT_THROW(reference_curve_solver(circle, [](double) { return 1.0; }, [](double) { return 0.0; }, 0.1, 4),
               InvalidArgument);
}

TEST(ReferenceSolver, SelfConvergenceAndMass) {
  const Surface e = Surface::ellipse(2, 1);
  const auto& curve = *e.get_if<ParametricCurve>();
  auto a = [&](double s) { return diffusivity_from_curvature(curve_curvature(curve, s)); };
  auto u0 = [](double s) { return 1.0 + std::cos(3.0 * s); };
  const CurveSolution c1 = reference_curve_solver(curve, a, u0, 0.5, 1024);
  const CurveSolution c2 = reference_curve_solver(curve, a, u0, 0.5, 2048);
  double diff = 0.0;
  for (std::size_t i = 0; i < c1.s.size(); ++i) diff = std::max(diff, std::abs(c1.u[i] - c2.u[2 * i]));
  EXPECT_LE(diff, 1e-6);

  const CurveSolution start = reference_curve_solver(curve, a, u0, 0.0, 1024);
  const double m0 = curve_mass(start);
  EXPECT_NEAR(curve_mass(c1), m0, 1e-12 * std::abs(m0) * static_cast<double>(c1.steps));
}

TEST(CurvatureDiffusion, CircleReducesToScaledHeat) {
  // kappa = 1 gives a = 1/2, so cos(3 theta) decays like exp(-9 t / 2)
  std::vector<double> dxs{0.1, 0.05, 0.025}, errs;
  for (double dx : dxs) {
    const CurvatureDiffusionProblem p = curvature_diffusion_problem(Surface::circle(), dx, 3, recommended_gamma(2, dx));
    StepperConfig cfg;
    cfg.dt = dx * dx / 4;
    cfg.t_end = 0.5;
    const Vector v = forward_euler(p.system, p.v0, cfg);
    const ErrorReport r = restrict_and_error(
        p.grid, v, [](double t, const SurfaceSample& s) { return std::exp(-4.5 * t) * std::cos(3.0 * s.param[0]); }, 0.5,
        default_sample_count(Surface::circle(), dx));
    errs.push_back(r.max_err);
  }
  EXPECT_GE(convergence_slope(dxs, errs), 1.8);
  EXPECT_LE(errs.back(), 0.01);
}

TEST(CurvatureDiffusion, ReferenceNeedsCurve) {
  EXPECT_THROW(curvature_diffusion_reference(Surface::sphere(), 0.1), Unsupported);
}

TEST(Convergence, SlopeAndPairs) {
  const std::vector<double> dx{0.2, 0.1, 0.05};
  const std::vector<double> err{4e-2, 1e-2, 2.5e-3};
  EXPECT_NEAR(convergence_slope(dx, err), 2.0, 1e-12);
  for (double o : pairwise_orders(dx, err)) EXPECT_NEAR(o, 2.0, 1e-12);
  EXPECT_THROW(convergence_slope({0.1}, {0.1}), InvalidArgument);
  EXPECT_THROW(convergence_slope({0.1, 0.1}, {0.1, 0.2}), InvalidArgument);
  EXPECT_THROW(convergence_slope({0.1, 0.05}, {0.0, 0.2}), InvalidArgument);
  EXPECT_THROW(convergence_slope({0.1, 0.05}, {0.1}), DimensionMismatch);
}
