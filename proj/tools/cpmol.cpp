// cpmol: convergence studies, stability scans, curvature checks and
// pattern simulations for the closest point method of lines.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpmol/cpmol.hpp"

namespace {

using namespace cpmol;

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string problem = "heat-circle";
  std::string surface = "circle";
  double radius = 1.0;
  std::string mesh;
  std::vector<double> dx{0.1};
  double dt = 0.0;
  std::string dt_policy;
  std::string gamma = "auto";
  int p = 3;
  std::string scheme;
  double t_end = 0.5;
  std::uint64_t seed = 1;
  std::string out;
};

PenaltyConfig parse_gamma(const std::string& s) {
  if (s == "auto") return PenaltyConfig::recommended();
  if (s == "one-over-dt") return PenaltyConfig::ruuth_merriman();
  try {
    std::size_t used = 0;
    const double g = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return PenaltyConfig::fixed(g);
  } catch (const std::exception&) {
    throw UsageError("--gamma expects auto, one-over-dt or a number, got '" + s + "'");
  }
}

DtPolicy parse_dt_policy(const std::string& s, double dt, Scheme scheme) {
  DtPolicy d;
  if (s.empty()) {
    // defaults: dx^2/4 explicit, dx/4 implicit; an explicit --dt wins
    if (dt > 0.0) return {DtPolicy::Kind::fixed, dt};
    d.kind = is_explicit(scheme) ? DtPolicy::Kind::dx2_over_4 : DtPolicy::Kind::dx_over_4;
    return d;
  }
  if (s == "dx2/4") return {DtPolicy::Kind::dx2_over_4, 0.0};
  if (s == "dx/4") return {DtPolicy::Kind::dx_over_4, 0.0};
  if (s == "explicit") {
    if (!(dt > 0.0)) throw UsageError("--dt-policy explicit needs a positive --dt");
    return {DtPolicy::Kind::fixed, dt};
  }
  throw UsageError("--dt-policy expects dx2/4, dx/4 or explicit, got '" + s + "'");
}

Scheme scheme_or(const std::string& s, Scheme fallback) {
  if (s.empty()) return fallback;
  try {
    return parse_scheme(s);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

Surface make_surface(const Common& c) {
  if (!c.mesh.empty()) return Surface::mesh(load_mesh(c.mesh), c.mesh);
  if (c.surface == "circle") return Surface::circle(c.radius);
  if (c.surface == "sphere") return Surface::sphere(c.radius);
  if (c.surface == "ellipse") return Surface::ellipse(2.0, 1.0);
  if (c.surface == "snowflake") return Surface::snowflake();
  throw UsageError("unknown surface '" + c.surface + "' (circle, sphere, ellipse, snowflake or --mesh PATH)");
}

RunManifest manifest(const std::string& command, const Common& c) {
  RunManifest m;
  m.command = command;
  m.problem = c.problem;
  m.seed = c.seed;
  return m;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

class Timer {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

// converge ------------------------------------------------------------------

int cmd_converge(const Common& c) {
  const ProblemKind kind = parse_problem(c.problem);
  const ProblemSpec spec = make_problem(kind);
  const bool curvdiff = kind == ProblemKind::curvdiff_ellipse || kind == ProblemKind::curvdiff_snowflake;
  if (!spec.has_exact() && !curvdiff) throw UsageError("converge needs a problem with an exact or reference solution");
  const Scheme default_scheme = kind == ProblemKind::heat_circle ? Scheme::forward_euler : Scheme::bdf2;
  RunSettings rs;
  rs.scheme = scheme_or(c.scheme, default_scheme);
  rs.dt_policy = parse_dt_policy(c.dt_policy, c.dt, rs.scheme);
  rs.penalty = parse_gamma(c.gamma);
  rs.p = c.p;
  rs.t_end = c.t_end;

  Timer timer;
  RunManifest m = manifest("converge", c);
  m.set("dx", join(c.dx));
  m.set("scheme", to_string(rs.scheme));
  m.set("dt_policy", rs.dt_policy.describe());
  if (rs.dt_policy.kind == DtPolicy::Kind::fixed) m.set("dt", rs.dt_policy.value);
  m.set("gamma_policy", c.gamma);
  m.set("p", std::to_string(rs.p));
  m.set("t_end", rs.t_end);

  std::vector<std::string> cols{"dx", "dt", "p", "gamma", "max_err"};
  if (spec.stated_exact) cols.push_back("stated_form_err");
  CsvTable table(cols);
  std::vector<double> dxs, errs;
  std::optional<CurveSolution> ref;
  if (curvdiff) ref = curvature_diffusion_reference(spec.surface, rs.t_end);
  for (double dx : c.dx) {
    rs.dx = dx;
    const ErrorReport r = curvdiff ? run_curvature_diffusion(spec.surface, rs, *ref) : run_problem(spec, rs);
    std::vector<std::string> row{format_double(r.dx), format_double(r.dt), std::to_string(r.p), format_double(r.gamma),
                                 format_double(r.max_err)};
    if (spec.stated_exact) row.push_back(format_double(r.stated_max_err.value_or(0.0)));
    table.row(row);
    dxs.push_back(dx);
    errs.push_back(r.max_err);
  }
  if (dxs.size() >= 2) {
    const auto orders = pairwise_orders(dxs, errs);
    table.footer("pair_orders", join(orders));
    table.footer("ls_slope", format_double(convergence_slope(dxs, errs)));
  }
  m.wall_seconds = timer.seconds();
  std::ostringstream os;
  table.write(os, m);
  emit(c.out, os.str());
  return 0;
}

// stability-scan -------------------------------------------------------------

int cmd_stability_scan(const Common& c, const std::vector<double>& gamma_dx2) {
  if (gamma_dx2.empty()) throw UsageError("stability-scan needs a non-empty --gamma-dx2 list");
  if (c.dx.size() != 1) throw UsageError("stability-scan takes a single --dx");
  const double dx = c.dx.front();
  const Scheme scheme = scheme_or(c.scheme, Scheme::forward_euler);
  if (!is_explicit(scheme)) throw UsageError("stability-scan needs an explicit scheme");
  Timer timer;
  const BandedGrid grid = build_band(Surface::circle(), dx, StencilSpec{1, c.p});
  StabilityScanOptions opt;
  opt.seed = c.seed;

  RunManifest m = manifest("stability-scan", c);
  m.problem = "lap-minus-identity-circle";
  m.set("dx", dx);
  m.set("scheme", to_string(scheme));
  m.set("p", std::to_string(c.p));
  m.set("steps", std::to_string(opt.steps));
  m.set("growth_bound", opt.growth);
  CsvTable table({"gamma", "gamma_dx2", "dt_max_observed", "dt_predicted", "ratio"});
  for (double gd : gamma_dx2) {
    const double gamma = gd / (dx * dx);
    const SparseMatrix op = stability_operator(grid, gamma, c.p);
    const double pred = predicted_max_dt(2, dx, gamma, scheme);
    const double obs = max_stable_dt(op, scheme, 4.0 * pred, opt);
    table.row(std::vector<double>{gamma, gd, obs, pred, obs / pred});
  }
  m.wall_seconds = timer.seconds();
  std::ostringstream os;
  table.write(os, m);
  emit(c.out, os.str());
  return 0;
}

// gamma-sweep ----------------------------------------------------------------

int cmd_gamma_sweep(const Common& c, const std::vector<double>& gamma_dx2) {
  if (gamma_dx2.empty()) throw UsageError("gamma-sweep needs a non-empty --gamma-dx2 list");
  if (c.dx.size() != 1) throw UsageError("gamma-sweep takes a single --dx");
  const double dx = c.dx.front();
  const ProblemSpec spec = make_problem(parse_problem(c.problem));
  if (!spec.has_exact() || spec.kind == ProblemKind::poisson_circle) {
    throw UsageError("gamma-sweep needs a time-dependent problem with an exact solution");
  }
  RunSettings rs;
  rs.dx = dx;
  rs.scheme = scheme_or(c.scheme, Scheme::forward_euler);
  rs.dt_policy = parse_dt_policy(c.dt_policy.empty() ? "dx2/4" : c.dt_policy, c.dt, rs.scheme);
  rs.p = c.p;
  rs.t_end = c.t_end;

  Timer timer;
  RunManifest m = manifest("gamma-sweep", c);
  m.set("dx", dx);
  m.set("scheme", to_string(rs.scheme));
  m.set("dt_policy", rs.dt_policy.describe());
  m.set("p", std::to_string(rs.p));
  m.set("t_end", rs.t_end);
  CsvTable table({"gamma_dx2", "gamma", "dt", "max_err", "growth", "status"});
  for (double gd : gamma_dx2) {
    rs.penalty = PenaltyConfig::fixed(gd / (dx * dx));
    std::vector<std::string> row{format_double(gd), format_double(gd / (dx * dx))};
    try {
      const ErrorReport r = run_problem(spec, rs);
      const bool stable = r.growth <= 10.0;
      row.insert(row.end(), {format_double(r.dt), stable ? format_double(r.max_err) : "inf", format_double(r.growth),
                             stable ? "stable" : "unstable"});
    } catch (const NonFinite&) {
      row.insert(row.end(), {format_double(rs.dt_policy.resolve(dx)), "inf", "inf", "nonfinite"});
    }
    table.row(row);
  }
  m.wall_seconds = timer.seconds();
  std::ostringstream os;
  table.write(os, m);
  emit(c.out, os.str());
  return 0;
}

// curvature-check ------------------------------------------------------------

int cmd_curvature_check(const Common& c) {
  if (c.dx.size() != 1) throw UsageError("curvature-check takes a single --dx");
  const double dx = c.dx.front();
  const Surface surface = make_surface(c);
  if (!surface.is_parameterized()) throw UsageError("curvature-check needs an analytic surface");
  Timer timer;
  const BandedGrid grid = build_band(surface, dx, StencilSpec{1, c.p});
  const Vector kappa = curvature_field(grid, c.p);

  RunManifest m = manifest("curvature-check", c);
  m.problem = surface.name();
  m.set("radius", c.radius);
  m.set("dx", dx);
  m.set("p", std::to_string(c.p));
  const bool sphere = surface.surface_dim() == 2;
  std::vector<std::string> cols = sphere ? std::vector<std::string>{"theta", "phi"} : std::vector<std::string>{"s"};
  for (const char* k : {"kappa_computed", "kappa_exact", "abs_err"}) cols.emplace_back(k);
  CsvTable table(cols);
  const std::size_t n = sphere ? 64 * 64 : default_sample_count(surface, dx);
  double worst = 0.0;
  for (const SurfaceSample& s : sample_surface(surface, n)) {
    const double k = interpolate(grid, kappa, s.point, c.p);
    const double ex = exact_mean_curvature(surface, s.point);
    worst = std::max(worst, std::abs(k - ex));
    std::vector<double> row{s.param[0]};
    if (sphere) row.push_back(s.param[1]);
    row.insert(row.end(), {k, ex, std::abs(k - ex)});
    table.row(row);
  }
  table.footer("max_abs_err", format_double(worst));
  m.wall_seconds = timer.seconds();
  std::ostringstream os;
  table.write(os, m);
  emit(c.out, os.str());
  return 0;
}

// simulate -------------------------------------------------------------------

struct SimulateOptions {
  std::optional<std::size_t> steps;
  std::size_t snapshots = 1;
  double F = 0.054;
  double k = 0.063;
  double nu_u = -1.0;
  double nu_ratio = 0.5;
  double noise = 0.05;
  double patch_radius = 0.5;
  bool vtk = false;
};

std::string snapshot_path(const std::string& prefix, std::size_t index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%04zu.%s", index, ext);
  return prefix + buf;
}

void write_snapshot(const std::string& prefix, std::size_t index, const BandedGrid& grid,
                    const std::vector<std::pair<std::string, Vector>>& fields, RunManifest m, std::size_t step,
                    double t, bool vtk, const std::string& status) {
  m.set("step", std::to_string(step));
  m.set("time", t);
  m.set("status", status);
  const int d = grid.dim();
  std::vector<std::string> cols{"index"};
  const char* axes[] = {"x", "y", "z"};
  for (int a = 0; a < d; ++a) cols.emplace_back(axes[a]);
  for (int a = 0; a < d; ++a) cols.push_back(std::string("cp") + axes[a]);
  for (const auto& f : fields) cols.push_back(f.first);
  CsvTable table(cols);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    const Point x = grid.node_coords(i);
    for (int a = 0; a < d; ++a) row.push_back(format_double(x[a]));
    for (int a = 0; a < d; ++a) row.push_back(format_double(grid.cp(i).cp[a]));
    for (const auto& f : fields) row.push_back(format_double(f.second[static_cast<Eigen::Index>(i)]));
    table.row(std::move(row));
  }
  std::ostringstream os;
  table.write(os, m);
  if (prefix.empty() || prefix == "-") {
    std::cout << os.str();
    return;
  }
  write_file(snapshot_path(prefix, index, "csv"), os.str());
  if (vtk) {
    std::ostringstream vs;
    write_vtk_points(vs, grid, fields, m);
    write_file(snapshot_path(prefix, index, "vtk"), vs.str());
  }
}

int cmd_simulate(Common c, const SimulateOptions& so, bool surface_given) {
  const ProblemKind kind = parse_problem(c.problem);
  if (c.dx.size() != 1) throw UsageError("simulate takes a single --dx");
  const double dx = c.dx.front();
  if (!surface_given && c.mesh.empty()) {
    c.surface = kind == ProblemKind::gray_scott       ? "sphere"
                : kind == ProblemKind::curvdiff_snowflake ? "snowflake"
                                                          : "ellipse";
  }
  const Surface surface = make_surface(c);
  RunManifest m = manifest("simulate", c);
  m.set("surface", c.mesh.empty() ? surface.name() : c.mesh);
  m.set("dx", dx);
  m.set("p", std::to_string(c.p));

  BandedGrid grid = build_band(surface, dx, StencilSpec{1, c.p});  // replaced below
  SemiDiscreteSystem sys;
  Vector w;
  std::vector<std::string> names;
  std::vector<Vector> statics;
  std::vector<std::string> static_names;
  StepperConfig cfg;
  cfg.scheme = scheme_or(c.scheme, Scheme::imex_bdf2);

  if (kind == ProblemKind::gray_scott || kind == ProblemKind::gs_curvature) {
    GrayScottConfig gc;
    gc.reaction = {so.F, so.k};
    gc.nu_u = so.nu_u;
    gc.nu_ratio = so.nu_ratio;
    gc.curvature_ratio = kind == ProblemKind::gs_curvature;
    gc.p = c.p;
    gc.noise = so.noise;
    gc.patch_radius = so.patch_radius;
    gc.seed = c.seed;
    const PenaltyConfig pen = parse_gamma(c.gamma);
    if (pen.policy == PenaltyPolicy::explicit_value) gc.gamma = pen.value;
    if (pen.policy == PenaltyPolicy::one_over_dt) throw UsageError("simulate does not support --gamma one-over-dt");
    GrayScottProblem gs = gray_scott_problem(surface, dx, gc);
    grid = std::move(gs.grid);
    sys = std::move(gs.system);
    w = std::move(gs.w0);
    names = {"u", "v"};
    static_names = {"nu_v"};
    statics = {gs.nu_v};
    if (gc.curvature_ratio) {
      static_names.push_back("kappa");
      statics.push_back(gs.kappa);
    }
    m.set("F", so.F);
    m.set("k", so.k);
    m.set("nu_u", gs.nu_u[0]);
    m.set(gc.curvature_ratio ? "nu_v_rule" : "nu_ratio", gc.curvature_ratio ? std::string("curvature") : format_double(so.nu_ratio));
    m.set("noise", so.noise);
    m.set("patch_radius", so.patch_radius);
    m.set("gamma", gs.gamma);
    cfg.dt = c.dt > 0.0 ? c.dt : 1.0;
  } else if (kind == ProblemKind::curvdiff_ellipse || kind == ProblemKind::curvdiff_snowflake) {
    const PenaltyConfig pen = parse_gamma(c.gamma);
    cfg.dt = c.dt > 0.0 ? c.dt : dx / 4.0;
    if (c.scheme.empty()) cfg.scheme = Scheme::bdf2;
    const double gamma = pen.resolve(surface.embedding_dim(), dx, cfg.dt);
    CurvatureDiffusionProblem cd = curvature_diffusion_problem(surface, dx, c.p, gamma);
    grid = std::move(cd.grid);
    sys = std::move(cd.system);
    w = std::move(cd.v0);
    names = {"u"};
    static_names = {"kappa", "a"};
    statics = {cd.kappa, cd.diffusivity};
    m.set("gamma", gamma);
  } else {
    throw UsageError("simulate supports gray-scott, gs-curvature, curvdiff-ellipse and curvdiff-snowflake");
  }

  const std::size_t steps = so.steps ? *so.steps : detail::step_count(cfg.dt, c.t_end);
  cfg.t_end = static_cast<double>(steps) * cfg.dt;
  m.set("scheme", to_string(cfg.scheme));
  m.set("dt", cfg.dt);
  m.set("steps", std::to_string(steps));
  m.set("band_nodes", std::to_string(grid.size()));
  const bool vtk = so.vtk || grid.dim() == 3;

  const auto n = static_cast<Eigen::Index>(grid.size());
  auto fields = [&](const Vector& state) {
    std::vector<std::pair<std::string, Vector>> f;
    for (std::size_t i = 0; i < names.size(); ++i) f.emplace_back(names[i], state.segment(static_cast<Eigen::Index>(i) * n, n));
    for (std::size_t i = 0; i < statics.size(); ++i) f.emplace_back(static_names[i], statics[i]);
    return f;
  };

  const std::size_t count = std::max<std::size_t>(1, so.snapshots);
  std::size_t next = 0;
  auto due = [&](std::size_t step) { return steps == 0 || step * count >= next * steps || step == steps; };
  write_snapshot(c.out, next++, grid, fields(w), m, 0, 0.0, vtk, "ok");
  if (steps == 0) return 0;

  Vector last = w;
  std::size_t last_step = 0;
  double last_t = 0.0;
  try {
    integrate(sys, w, cfg, [&](std::size_t step, double t, const Vector& state) {
      last = state;
      last_step = step;
      last_t = t;
      if (next <= count && due(step)) write_snapshot(c.out, next++, grid, fields(state), m, step, t, vtk, "ok");
    });
  } catch (const NonFinite& e) {
    write_snapshot(c.out, next, grid, fields(last), m, last_step, last_t, vtk, "nonfinite after step " + std::to_string(e.step()));
    throw;
  }
  return 0;
}

// band / gen-mesh ------------------------------------------------------------

int cmd_band(const Common& c) {
  if (c.dx.size() != 1) throw UsageError("band takes a single --dx");
  const Surface surface = make_surface(c);
  const BandedGrid grid = build_band(surface, c.dx.front(), StencilSpec{1, c.p});
  RunManifest m = manifest("band", c);
  m.problem = surface.name();
  m.set("dx", c.dx.front());
  m.set("p", std::to_string(c.p));
  m.set("nodes", std::to_string(grid.size()));
  std::ostringstream os;
  write_manifest(os, m);
  write_band_csv(os, grid);
  emit(c.out, os.str());
  return 0;
}

int cmd_gen_mesh(const std::string& shape, int level, double R, double r, const std::string& out) {
  TriangleMesh mesh = [&] {
    if (shape == "icosphere") return make_icosphere(level, R);
    if (shape == "torus") return make_torus(R, r, 8 * level, 4 * level);
    if (shape == "octahedron") return make_octahedron();
    if (shape == "cube") return make_cube();
    throw UsageError("unknown mesh shape '" + shape + "'");
  }();
  std::ostringstream os;
  write_off(os, mesh);
  emit(out, os.str());
  return 0;
}

void apply_threads() {
  if (const char* env = std::getenv("CPMOL_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) throw UsageError("CPMOL_THREADS must be a positive integer");
    Eigen::setNbThreads(static_cast<int>(n));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closest point method of lines solver for surface PDEs"};
  app.set_version_flag("--version", std::string(CPMOL_VERSION_STRING));
  app.require_subcommand(1);

  Common c;
  std::vector<double> gamma_dx2;
  SimulateOptions so;
  std::string shape = "torus";
  int level = 4;
  double major = 1.0, minor = 0.4;

  auto common = [&](CLI::App* sub, bool multi_dx) {
    if (multi_dx) {
      sub->add_option("--dx", c.dx, "grid spacing(s)")->delimiter(',');
    } else {
      sub->add_option("--dx", c.dx, "grid spacing")->expected(1);
    }
    sub->add_option("--p", c.p, "interpolation degree")->check(CLI::Range(1, kMaxInterpDegree));
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--out", c.out, "output path (stdout if omitted)");
  };
  auto timing = [&](CLI::App* sub) {
    sub->add_option("--dt", c.dt, "time step")->check(CLI::PositiveNumber);
    sub->add_option("--dt-policy", c.dt_policy, "dx2/4, dx/4 or explicit");
    sub->add_option("--gamma", c.gamma, "auto, one-over-dt or a value");
    sub->add_option("--scheme", c.scheme, "forward-euler, rk4, backward-euler, bdf2, imex-bdf2");
    sub->add_option("--t-end", c.t_end, "final time")->check(CLI::NonNegativeNumber);
  };
  auto surface_opts = [&](CLI::App* sub) {
    sub->add_option("--surface", c.surface, "circle, sphere, ellipse or snowflake");
    sub->add_option("--radius", c.radius, "circle / sphere radius")->check(CLI::PositiveNumber);
    sub->add_option("--mesh", c.mesh, "triangle mesh (OFF or OBJ)");
  };

  c.dx = {0.2, 0.1, 0.05, 0.025};
  auto* converge = app.add_subcommand("converge", "convergence study over a list of dx");
  converge->add_option("--problem", c.problem, "problem name");
  common(converge, true);
  timing(converge);

  auto* scan = app.add_subcommand("stability-scan", "largest stable explicit dt for u_t = Lap_S u - u on the unit circle");
  scan->add_option("--gamma-dx2", gamma_dx2, "gamma * dx^2 values")->delimiter(',')->check(CLI::PositiveNumber);
  scan->add_option("--scheme", c.scheme, "forward-euler or rk4");
  common(scan, false);

  auto* sweep = app.add_subcommand("gamma-sweep", "error as a function of gamma dx^2");
  sweep->add_option("--problem", c.problem, "problem name");
  sweep->add_option("--gamma-dx2", gamma_dx2, "gamma * dx^2 values")->delimiter(',');
  common(sweep, false);
  timing(sweep);

  auto* curv = app.add_subcommand("curvature-check", "computed vs exact mean curvature");
  common(curv, false);
  surface_opts(curv);

  auto* sim = app.add_subcommand("simulate", "time-dependent run with CSV / VTK snapshots");
  sim->add_option("--problem", c.problem, "gray-scott, gs-curvature, curvdiff-ellipse, curvdiff-snowflake");
  common(sim, false);
  timing(sim);
  surface_opts(sim);
  sim->add_option("--steps", so.steps, "number of steps (overrides --t-end)");
  sim->add_option("--snapshots", so.snapshots, "snapshots after the initial one");
  sim->add_option("--F", so.F, "feed rate");
  sim->add_option("--k", so.k, "kill rate");
  sim->add_option("--nu-u", so.nu_u, "u diffusivity (default dx^2/9)");
  sim->add_option("--nu-ratio", so.nu_ratio, "nu_v / nu_u");
  sim->add_option("--noise", so.noise, "perturbation amplitude");
  sim->add_option("--patch-radius", so.patch_radius, "perturbed patch radius");
  sim->add_flag("--vtk", so.vtk, "write VTK files for 2D runs too");

  auto* band = app.add_subcommand("band", "dump the computational band");
  common(band, false);
  surface_opts(band);

  auto* gen = app.add_subcommand("gen-mesh", "write a generated triangle mesh as OFF");
  gen->add_option("--shape", shape, "torus, icosphere, octahedron or cube");
  gen->add_option("--level", level, "refinement level")->check(CLI::Range(1, 8));
  gen->add_option("--major", major, "torus major radius / sphere radius");
  gen->add_option("--minor", minor, "torus minor radius");
  gen->add_option("--out", c.out, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    apply_threads();
    if (*converge) return cmd_converge(c);
    if (*scan) {
      if (scan->count("--gamma-dx2") == 0) gamma_dx2 = {0.5, 1, 2, 4, 8, 16, 40, 100, 400};
      if (scan->count("--dx") == 0) c.dx = {0.05};
      return cmd_stability_scan(c, gamma_dx2);
    }
    if (*sweep) {
      if (sweep->count("--gamma-dx2") == 0) gamma_dx2 = {0.1, 0.25, 0.5, 1, 2, 4, 6, 7, 8, 9, 10, 20, 100, 1000};
      if (sweep->count("--dx") == 0) c.dx = {0.05};
      return cmd_gamma_sweep(c, gamma_dx2);
    }
    if (*curv) {
      if (curv->count("--dx") == 0) c.dx = {0.05};
      return cmd_curvature_check(c);
    }
    if (*sim) {
      if (sim->count("--dx") == 0) c.dx = {0.1};
      if (sim->count("--problem") == 0) c.problem = "gray-scott";
      return cmd_simulate(c, so, sim->count("--surface") > 0);
    }
    if (*band) {
      if (band->count("--dx") == 0) c.dx = {0.1};
      return cmd_band(c);
    }
    if (*gen) return cmd_gen_mesh(shape, level, major, minor, c.out);
  } catch (const UsageError& e) {
    std::cerr << "cpmol: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NonFinite& e) {
    std::cerr << "cpmol: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const SolverFailure& e) {
    std::cerr << "cpmol: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const SingularSystem& e) {
    std::cerr << "cpmol: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const BandNotClosed& e) {
    std::cerr << "cpmol: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "cpmol: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
