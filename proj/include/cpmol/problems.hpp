#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cpmol/assembly.hpp"
#include "cpmol/band.hpp"
#include "cpmol/geometry.hpp"
#include "cpmol/operators.hpp"
#include "cpmol/reference_curve.hpp"
#include "cpmol/timestep.hpp"

namespace cpmol {

// Closed-form solutions used as oracles.

/// Heat equation on the unit circle from cos(theta) + cos(3 theta).
inline double exact_heat_circle(double t, double theta) {
  return std::exp(-t) * std::cos(theta) + std::exp(-9.0 * t) * std::cos(3.0 * theta);
}

/// Heat equation on the unit sphere from cos(phi + 1/2); phi is latitude.
inline double exact_heat_sphere(double t, double /*theta*/, double phi) { return std::exp(-2.0 * t) * std::cos(phi + 0.5); }

/// Surface biharmonic u_t = -Lap_S^2 u on the unit circle: mode k decays as exp(-k^4 t).
inline double exact_biharmonic_circle(double t, double theta) {
  return std::exp(-t) * std::cos(theta) + std::exp(-81.0 * t) * std::cos(3.0 * theta);
}

/// Heat equation on the unit sphere started from cos(phi + 1/2), as a
/// zonal Legendre series u = sum_l c_l exp(-l(l+1) t) P_l(sin phi).
/// The initial data is not a spherical harmonic (cos phi = sqrt(x^2 + y^2)),
/// so exp(-2t) cos(phi + 1/2) above is only its l = 1 part plus a
/// non-decaying mean; this series is the actual solution. Accurate to
/// rounding for t >= 0.005; t = 0 returns the initial data.
inline double heat_sphere_series(double t, double phi) {
  constexpr int kMaxDegree = 160;
  static const std::vector<double> coef = [] {
    // c_l = (2l+1)/2 int_{-pi/2}^{pi/2} u0(phi) P_l(sin phi) cos phi dphi, composite Simpson
    constexpr int n = 8192;
    const double a = -std::numbers::pi / 2.0, h = std::numbers::pi / n;
    std::vector<double> c(kMaxDegree + 1, 0.0);
    for (int i = 0; i <= n; ++i) {
      const double ph = a + h * i;
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      const double f = std::cos(ph + 0.5) * std::cos(ph);
      const double z = std::sin(ph);
      for (int l = 0; l <= kMaxDegree; ++l) c[l] += w * f * std::legendre(l, z);
    }
    for (int l = 0; l <= kMaxDegree; ++l) c[l] *= h / 3.0 * (2.0 * l + 1.0) / 2.0;
    return c;
  }();
  if (t == 0.0) return std::cos(phi + 0.5);
  if (t < 0.0) throw InvalidArgument("heat_sphere_series needs t >= 0");
  const double z = std::sin(phi);
  double sum = 0.0;
  for (int l = 0; l <= kMaxDegree; ++l) sum += coef[l] * std::exp(-l * (l + 1.0) * t) * std::legendre(l, z);
  return sum;
}

enum class ProblemKind {
  heat_circle,
  heat_sphere,
  biharmonic_circle,
  poisson_circle,
  gray_scott,
  curvdiff_ellipse,
  curvdiff_snowflake,
  gs_curvature,
};

inline std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::heat_circle: return "heat-circle";
    case ProblemKind::heat_sphere: return "heat-sphere";
    case ProblemKind::biharmonic_circle: return "biharmonic-circle";
    case ProblemKind::poisson_circle: return "poisson-circle";
    case ProblemKind::gray_scott: return "gray-scott";
    case ProblemKind::curvdiff_ellipse: return "curvdiff-ellipse";
    case ProblemKind::curvdiff_snowflake: return "curvdiff-snowflake";
    case ProblemKind::gs_curvature: return "gs-curvature";
  }
  return "unknown";
}

inline ProblemKind parse_problem(const std::string& s) {
  for (ProblemKind k : {ProblemKind::heat_circle, ProblemKind::heat_sphere, ProblemKind::biharmonic_circle,
                        ProblemKind::poisson_circle, ProblemKind::gray_scott, ProblemKind::curvdiff_ellipse,
                        ProblemKind::curvdiff_snowflake, ProblemKind::gs_curvature}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown problem '" + s + "'");
}

using SurfaceFunction = std::function<double(const SurfaceSample&)>;
using TimeSurfaceFunction = std::function<double(double, const SurfaceSample&)>;

/// One of the benchmark problems: surface, penalty policy, interpolation
/// degree, initial data and (where known) the exact solution, both as
/// functions of the surface parameter.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::heat_circle;
  Surface surface = Surface::circle();
  PenaltyConfig penalty = PenaltyConfig::recommended();
  int p = 3;
  SurfaceFunction initial;
  TimeSurfaceFunction exact;
  /// Closed form quoted for the problem when it differs from `exact`.
  TimeSurfaceFunction stated_exact;

  bool has_exact() const { return static_cast<bool>(exact); }
};

inline ProblemSpec make_problem(ProblemKind kind) {
  ProblemSpec spec;
  spec.kind = kind;
  auto cos3 = [](const SurfaceSample& s) { return std::cos(3.0 * s.param[0]); };
  switch (kind) {
    case ProblemKind::heat_circle:
      spec.initial = [](const SurfaceSample& s) { return exact_heat_circle(0.0, s.param[0]); };
      spec.exact = [](double t, const SurfaceSample& s) { return exact_heat_circle(t, s.param[0]); };
      break;
    case ProblemKind::heat_sphere:
      spec.surface = Surface::sphere();
      spec.initial = [](const SurfaceSample& s) { return exact_heat_sphere(0.0, s.param[0], s.param[1]); };
      spec.exact = [](double t, const SurfaceSample& s) { return heat_sphere_series(t, s.param[1]); };
      spec.stated_exact = [](double t, const SurfaceSample& s) { return exact_heat_sphere(t, s.param[0], s.param[1]); };
      break;
    case ProblemKind::biharmonic_circle:
      spec.p = 4;
      spec.initial = [](const SurfaceSample& s) { return exact_biharmonic_circle(0.0, s.param[0]); };
      spec.exact = [](double t, const SurfaceSample& s) { return exact_biharmonic_circle(t, s.param[0]); };
      break;
    case ProblemKind::poisson_circle:
      // Lap_S u = f with f = -cos(theta); mean-zero solution cos(theta)
      spec.initial = [](const SurfaceSample& s) { return -std::cos(s.param[0]); };
      spec.exact = [](double, const SurfaceSample& s) { return std::cos(s.param[0]); };
      break;
    case ProblemKind::gray_scott:
      spec.surface = Surface::sphere();
      break;
    case ProblemKind::curvdiff_ellipse:
      spec.surface = Surface::ellipse(2.0, 1.0);
      spec.initial = cos3;
      break;
    case ProblemKind::curvdiff_snowflake:
      spec.surface = Surface::snowflake();
      spec.initial = cos3;
      break;
    case ProblemKind::gs_curvature:
      spec.surface = Surface::ellipse(2.0, 1.0);
      break;
  }
  return spec;
}

/// Time-step policies of the benchmark runs.
struct DtPolicy {
  enum class Kind { dx2_over_4, dx_over_4, fixed };
  Kind kind = Kind::dx2_over_4;
  double value = 0.0;

  double resolve(double dx) const {
    switch (kind) {
      case Kind::dx2_over_4: return dx * dx / 4.0;
      case Kind::dx_over_4: return dx / 4.0;
      case Kind::fixed:
        if (!(value > 0.0)) throw InvalidArgument("fixed dt must be positive");
        return value;
    }
    return 0.0;
  }

  std::string describe() const {
    switch (kind) {
      case Kind::dx2_over_4: return "dx2/4";
      case Kind::dx_over_4: return "dx/4";
      case Kind::fixed: return "explicit";
    }
    return "";
  }
};

struct ErrorReport {
  double dx = 0.0;
  double dt = 0.0;
  int p = 0;
  double gamma = 0.0;
  double max_err = 0.0;
  std::size_t samples = 0;
  /// Error against ProblemSpec::stated_exact, when the problem has one.
  std::optional<double> stated_max_err;
  /// max_n |v^n|_inf / |v^0|_inf over the run (1 for steady problems).
  double growth = 1.0;
};

/// Error-evaluation sample count for a surface at spacing dx:
/// 10 ceil(2 pi / dx) on curves, an m x m lat-long grid with
/// m = 2 ceil(pi / dx) on the sphere.
inline std::size_t default_sample_count(const Surface& surface, double dx) {
  if (surface.embedding_dim() == 2) return 10 * static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / dx));
  const auto m = 2 * static_cast<std::size_t>(std::ceil(std::numbers::pi / dx));
  return m * m;
}

/// Values of the band function v restricted to surface samples by
/// degree-p interpolation.
inline std::vector<double> restrict_to_surface(const BandedGrid& grid, const Vector& v,
                                               const std::vector<SurfaceSample>& samples, int p) {
  if (v.size() != static_cast<Eigen::Index>(grid.size())) throw DimensionMismatch("band vector has wrong length");
  std::vector<double> out;
  out.reserve(samples.size());
  for (const SurfaceSample& s : samples) out.push_back(interpolate(grid, v, s.point, p));
  return out;
}

/// Max-norm error of v restricted to the surface against exact(t, .).
/// With subtract_mean the sample mean of the restricted values is removed
/// first (for solutions defined up to a constant).
inline ErrorReport restrict_and_error(const BandedGrid& grid, const Vector& v, const TimeSurfaceFunction& exact,
                                      double t, std::size_t n_samples, bool subtract_mean = false) {
  if (!v.allFinite()) throw InvalidArgument("restrict_and_error needs a finite band vector");
  const std::vector<SurfaceSample> samples = sample_surface(grid.surface(), n_samples);
  std::vector<double> values = restrict_to_surface(grid, v, samples, grid.degree());
  if (subtract_mean) {
    double mean = 0.0;
    for (double x : values) mean += x;
    mean /= static_cast<double>(values.size());
    for (double& x : values) x -= mean;
  }
  ErrorReport r;
  r.dx = grid.dx();
  r.p = grid.degree();
  r.samples = samples.size();
  for (std::size_t i = 0; i < samples.size(); ++i) r.max_err = std::max(r.max_err, std::abs(values[i] - exact(t, samples[i])));
  return r;
}

/// Closest point extension of a parameter-space function onto the band.
inline Vector extend_to_band(const BandedGrid& grid, const SurfaceFunction& f) {
  Vector v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const CpResult& c = grid.cp(n);
    SurfaceSample s{c.cp, c.param.value_or(Vec2::Zero())};
    v[static_cast<Eigen::Index>(n)] = f(s);
  }
  return v;
}

/// Settings of one run in a convergence study.
struct RunSettings {
  double dx = 0.1;
  Scheme scheme = Scheme::forward_euler;
  DtPolicy dt_policy{};
  PenaltyConfig penalty = PenaltyConfig::recommended();
  int p = 3;
  double t_end = 0.5;
  LinearSolverConfig solver{};
  std::size_t samples = 0;  // 0: default_sample_count
};

/// Runs a problem with a known exact solution (heat, biharmonic,
/// Poisson) at one resolution and measures the surface max-norm error.
inline ErrorReport run_problem(const ProblemSpec& spec, const RunSettings& rs) {
  if (!spec.has_exact()) throw InvalidArgument("problem " + to_string(spec.kind) + " has no exact solution");
  const BandedGrid grid = build_band(spec.surface, rs.dx, StencilSpec{1, rs.p});
  const int dim = grid.dim();
  const std::size_t samples = rs.samples ? rs.samples : default_sample_count(spec.surface, rs.dx);
  const SparseOperator E = extension_matrix(grid, rs.p);
  const SparseOperator L = laplacian(grid);

  if (spec.kind == ProblemKind::poisson_circle) {
    const double gamma = rs.penalty.resolve(dim, rs.dx);
    const Vector f = extend_to_band(grid, spec.initial);
    const PoissonSystem sys{heat_operator(E, L, gamma), E.matrix * f};
    const Vector v = solve_poisson(sys);
    ErrorReport r = restrict_and_error(grid, v, spec.exact, 0.0, samples, true);
    r.gamma = gamma;
    return r;
  }

  StepperConfig cfg;
  cfg.scheme = rs.scheme;
  cfg.dt = rs.dt_policy.resolve(rs.dx);
  cfg.t_end = rs.t_end;
  cfg.solver = rs.solver;
  const double dt_used = is_explicit(cfg.scheme) ? cfg.dt : implicit_step(cfg);
  const double gamma = rs.penalty.resolve(dim, rs.dx, dt_used);

  SemiDiscreteSystem sys;
  sys.linear = spec.kind == ProblemKind::biharmonic_circle ? biharmonic_operator(E, L, gamma).matrix
                                                            : heat_operator(E, L, gamma).matrix;
  const Vector v0 = extend_to_band(grid, spec.initial);
  const double norm0 = v0.lpNorm<Eigen::Infinity>();
  double peak = norm0;
  const Vector v = integrate(sys, v0, cfg, [&](std::size_t, double, const Vector& w) {
    peak = std::max(peak, w.lpNorm<Eigen::Infinity>());
  });
  ErrorReport r = restrict_and_error(grid, v, spec.exact, rs.t_end, samples);
  r.growth = norm0 > 0.0 ? peak / norm0 : 1.0;
  if (spec.stated_exact) r.stated_max_err = restrict_and_error(grid, v, spec.stated_exact, rs.t_end, samples).max_err;
  r.dt = dt_used;
  r.gamma = gamma;
  return r;
}

/// Linear test operator of the stability scans: u_t = Lap_S u - u,
/// discretized as E L - I - gamma (I - E).
inline SparseMatrix stability_operator(const BandedGrid& grid, double gamma, int p) {
  const SparseOperator E = extension_matrix(grid, p);
  const SparseOperator L = laplacian(grid);
  SparseMatrix I(E.rows(), E.cols());
  I.setIdentity();
  return SparseMatrix(heat_operator(E, L, gamma).matrix - I);
}

// Gray-Scott reaction-diffusion.

struct GrayScottParams {
  double F = 0.054;
  double k = 0.063;
};

/// Reaction terms (-u v^2 + F (1 - u), u v^2 - (F + k) v).
inline std::pair<Vector, Vector> gray_scott_reaction(const Vector& u, const Vector& v, const GrayScottParams& gs) {
  const Vector uvv = u.cwiseProduct(v.cwiseAbs2());
  Vector du = -uvv + gs.F * (Vector::Ones(u.size()) - u);
  Vector dv = uvv - (gs.F + gs.k) * v;
  return {std::move(du), std::move(dv)};
}

/// diag(nu) E L - gamma (I - E), the linear part of one species.
inline SparseMatrix gray_scott_operator(const SparseOperator& E, const SparseOperator& L, const Vector& nu, double gamma) {
  if (nu.size() != E.rows()) throw DimensionMismatch("diffusivity vector length differs from band size");
  const SparseMatrix EL = E.matrix * L.matrix;
  return SparseMatrix(nu.asDiagonal() * EL) + detail::penalty(E.matrix, gamma);
}

/// Full semi-discrete right-hand side (du, dv) = (M_u u + R_u, M_v v + R_v).
inline std::pair<Vector, Vector> gray_scott_rhs(const Vector& u, const Vector& v, const GrayScottParams& gs,
                                                const SparseMatrix& M_u, const SparseMatrix& M_v) {
  if (u.size() != v.size() || M_u.rows() != u.size() || M_v.rows() != v.size()) {
    throw DimensionMismatch("gray_scott_rhs: shapes do not match");
  }
  auto [ru, rv] = gray_scott_reaction(u, v, gs);
  return {M_u * u + ru, M_v * v + rv};
}

/// Stacked system for [u; v] with a block-diagonal linear part.
inline SemiDiscreteSystem gray_scott_system(const SparseMatrix& M_u, const SparseMatrix& M_v, const GrayScottParams& gs) {
  const Eigen::Index n = M_u.rows();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(M_u.nonZeros() + M_v.nonZeros()));
  for (Eigen::Index r = 0; r < n; ++r) {
    for (SparseMatrix::InnerIterator it(M_u, r); it; ++it) t.emplace_back(static_cast<int>(r), static_cast<int>(it.col()), it.value());
    for (SparseMatrix::InnerIterator it(M_v, r); it; ++it) {
      t.emplace_back(static_cast<int>(r + n), static_cast<int>(it.col() + n), it.value());
    }
  }
  SemiDiscreteSystem sys;
  sys.linear = SparseMatrix(2 * n, 2 * n);
  sys.linear.setFromTriplets(t.begin(), t.end());
  sys.nonlinear = [n, gs](double, const Vector& w) {
    auto [ru, rv] = gray_scott_reaction(w.head(n), w.tail(n), gs);
    Vector out(2 * n);
    out << ru, rv;
    return out;
  };
  return sys;
}

/// Homogeneous state (1, 0) with a seeded uniform perturbation on the
/// nodes whose closest point lies within patch_radius of patch_centre:
/// u -= amplitude xi, v += amplitude eta with xi, eta ~ U[0, 1).
inline Vector gray_scott_initial(const BandedGrid& grid, double amplitude, const Point& patch_centre,
                                 double patch_radius, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Vector w(2 * n);
  w.head(n).setOnes();
  w.tail(n).setZero();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = unit(rng);
    const double eta = unit(rng);
    if ((grid.cp(static_cast<std::size_t>(i)).cp - patch_centre).norm() > patch_radius) continue;
    w[i] -= amplitude * xi;
    w[i + n] += amplitude * eta;
  }
  return w;
}

// Curvature-dependent diffusion u_t = div_S(a grad_S u), a = 1/(1 + |kappa|).

struct CurvatureDiffusionProblem {
  BandedGrid grid;
  Vector kappa;
  Vector diffusivity;
  double gamma = 0.0;
  SemiDiscreteSystem system;
  Vector v0;
};

/// Wires curvature_field -> diffusivity_from_curvature -> varcoef_operator
/// with initial data u(s, 0) = cos(3 s).
inline CurvatureDiffusionProblem curvature_diffusion_problem(const Surface& surface, double dx, int p, double gamma) {
  CurvatureDiffusionProblem prob{build_band(surface, dx, StencilSpec{1, p}), {}, {}, gamma, {}, {}};
  prob.kappa = curvature_field(prob.grid, p);
  prob.diffusivity = diffusivity_from_curvature(prob.kappa);
  prob.system.linear = varcoef_operator(prob.grid, prob.diffusivity, gamma, p).matrix;
  prob.v0 = extend_to_band(prob.grid, [](const SurfaceSample& s) { return std::cos(3.0 * s.param[0]); });
  return prob;
}

/// Parameter-space oracle for the same problem on a parameterized curve.
inline CurveSolution curvature_diffusion_reference(const Surface& surface, double t_end, std::size_t n = 2048) {
  const auto* curve = surface.get_if<ParametricCurve>();
  if (curve != nullptr) {
    return reference_curve_solver(
        *curve, [curve](double s) { return diffusivity_from_curvature(curve_curvature(*curve, s)); },
        [](double s) { return std::cos(3.0 * s); }, t_end, n);
  }
  if (const auto* c = surface.get_if<Circle>()) {
    const double r = c->radius;
    const Point centre = c->center;
    ParametricCurve circle{
        [=](double s) { return Vec2(centre.x() + r * std::cos(s), centre.y() + r * std::sin(s)); },
        [=](double s) { return Vec2(-r * std::sin(s), r * std::cos(s)); },
        [=](double s) { return Vec2(-r * std::cos(s), -r * std::sin(s)); },
    };
    return reference_curve_solver(
        circle, [r](double) { return diffusivity_from_curvature(1.0 / r); }, [](double s) { return std::cos(3.0 * s); },
        t_end, n);
  }
  throw Unsupported("curvature diffusion reference needs a curve");
}

/// Max discrepancy between the band solution restricted to the reference
/// grid points and the reference solution.
inline double curve_discrepancy(const BandedGrid& grid, const Vector& v, const CurveSolution& ref) {
  double err = 0.0;
  for (std::size_t i = 0; i < ref.s.size(); ++i) {
    const Point y = surface_point(grid.surface(), Vec2(ref.s[i], 0.0));
    err = std::max(err, std::abs(interpolate(grid, v, y, grid.degree()) - ref.u[i]));
  }
  return err;
}

/// One curvature-diffusion run against a precomputed reference; max_err
/// is the curve_discrepancy at t_end.
inline ErrorReport run_curvature_diffusion(const Surface& surface, const RunSettings& rs, const CurveSolution& ref) {
  StepperConfig cfg;
  cfg.scheme = rs.scheme;
  cfg.dt = rs.dt_policy.resolve(rs.dx);
  cfg.t_end = rs.t_end;
  cfg.solver = rs.solver;
  const double dt_used = is_explicit(cfg.scheme) ? cfg.dt : implicit_step(cfg);
  const double gamma = rs.penalty.resolve(surface.embedding_dim(), rs.dx, dt_used);
  const CurvatureDiffusionProblem prob = curvature_diffusion_problem(surface, rs.dx, rs.p, gamma);
  const Vector v = integrate(prob.system, prob.v0, cfg);
  ErrorReport r;
  r.dx = rs.dx;
  r.dt = dt_used;
  r.p = rs.p;
  r.gamma = gamma;
  r.samples = ref.s.size();
  r.max_err = curve_discrepancy(prob.grid, v, ref);
  return r;
}

/// Gray-Scott setup. Negative nu_u / gamma select the defaults dx^2 / 9
/// and 2d / dx^2. With curvature_ratio, nu_v follows the curvature
/// through gs_diffusivity_ratio instead of nu_ratio.
struct GrayScottConfig {
  GrayScottParams reaction{};
  double nu_u = -1.0;
  double nu_ratio = 0.5;
  bool curvature_ratio = false;
  double gamma = -1.0;
  int p = 3;
  double noise = 0.05;
  double patch_radius = 0.5;
  std::optional<Point> patch_centre;
  std::uint64_t seed = 1;
};

struct GrayScottProblem {
  BandedGrid grid;
  Vector nu_u;
  Vector nu_v;
  Vector kappa;  // empty unless curvature_ratio
  double gamma = 0.0;
  SemiDiscreteSystem system;
  Vector w0;  // stacked [u; v]
};

inline GrayScottProblem gray_scott_problem(const Surface& surface, double dx, const GrayScottConfig& cfg) {
  GrayScottProblem prob{build_band(surface, dx, StencilSpec{1, cfg.p}), {}, {}, {}, 0.0, {}, {}};
  const BandedGrid& g = prob.grid;
  const auto n = static_cast<Eigen::Index>(g.size());
  const double nu = cfg.nu_u < 0.0 ? dx * dx / 9.0 : cfg.nu_u;
  prob.gamma = cfg.gamma < 0.0 ? recommended_gamma(g.dim(), dx) : cfg.gamma;
  prob.nu_u = Vector::Constant(n, nu);
  if (cfg.curvature_ratio) {
    prob.kappa = curvature_field(g, cfg.p);
    prob.nu_v = gs_diffusivity_ratio(prob.kappa, prob.kappa.maxCoeff(), prob.kappa.minCoeff(), nu);
  } else {
    prob.nu_v = Vector::Constant(n, cfg.nu_ratio * nu);
  }
  const SparseOperator E = extension_matrix(g, cfg.p);
  const SparseOperator L = laplacian(g);
  prob.system = gray_scott_system(gray_scott_operator(E, L, prob.nu_u, prob.gamma),
                                  gray_scott_operator(E, L, prob.nu_v, prob.gamma), cfg.reaction);
  Point centre;
  if (cfg.patch_centre) {
    centre = *cfg.patch_centre;
  } else if (surface.is_parameterized()) {
    centre = surface_point(surface, Vec2::Zero());
  } else {
    centre = sample_surface(surface, 1).front().point;
  }
  prob.w0 = gray_scott_initial(g, cfg.noise, centre, cfg.patch_radius, cfg.seed);
  return prob;
}

}  // namespace cpmol
