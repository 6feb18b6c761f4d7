#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include "cpmol/errors.hpp"
#include "cpmol/operators.hpp"

namespace cpmol {

enum class Scheme { forward_euler, rk4, backward_euler, bdf2, imex_bdf2 };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::forward_euler: return "forward-euler";
    case Scheme::rk4: return "rk4";
    case Scheme::backward_euler: return "backward-euler";
    case Scheme::bdf2: return "bdf2";
    case Scheme::imex_bdf2: return "imex-bdf2";
  }
  return "unknown";
}

inline Scheme parse_scheme(const std::string& s) {
  if (s == "forward-euler" || s == "fe") return Scheme::forward_euler;
  if (s == "rk4") return Scheme::rk4;
  if (s == "backward-euler" || s == "be") return Scheme::backward_euler;
  if (s == "bdf2") return Scheme::bdf2;
  if (s == "imex-bdf2" || s == "imex") return Scheme::imex_bdf2;
  throw InvalidArgument("unknown time-stepping scheme '" + s + "'");
}

inline bool is_explicit(Scheme s) { return s == Scheme::forward_euler || s == Scheme::rk4; }

struct LinearSolverConfig {
  /// automatic: sparse LU for small or sparse (2D-like) systems, Jacobi
  /// preconditioned BiCGSTAB otherwise (LU fill-in is prohibitive for 3D bands).
  /// If BiCGSTAB misses the tolerance, automatic switches to LU for good.
  enum class Kind { automatic, direct, iterative };
  Kind kind = Kind::automatic;
  Eigen::Index direct_limit = 5000;
  double dense_row_limit = 64.0;
  /// Relative residual bound, checked after every solve.
  double tol = 1e-10;
  int max_iter = 2000;
};

struct StepperConfig {
  Scheme scheme = Scheme::forward_euler;
  double dt = 0.0;
  double t_end = 0.0;
  LinearSolverConfig solver{};
};

/// dv/dt = linear v + nonlinear(t, v) + forcing(t).
struct SemiDiscreteSystem {
  SparseMatrix linear;
  std::function<Vector(double, const Vector&)> nonlinear;
  std::function<Vector(double)> forcing;

  Eigen::Index size() const { return linear.rows(); }

  Vector explicit_part(double t, const Vector& v) const {
    Vector out = Vector::Zero(v.size());
    if (nonlinear) out += nonlinear(t, v);
    if (forcing) out += forcing(t);
    return out;
  }

  Vector rhs(double t, const Vector& v) const {
    Vector out = linear * v;
    if (nonlinear) out += nonlinear(t, v);
    if (forcing) out += forcing(t);
    return out;
  }
};

/// Called after every completed step with (step number, time, state).
using StepObserver = std::function<void(std::size_t, double, const Vector&)>;

namespace detail {

inline void check_config(const SemiDiscreteSystem& sys, const Vector& v0, const StepperConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (!(cfg.t_end >= 0.0)) throw InvalidArgument("t_end must be nonnegative");
  if (sys.linear.rows() != sys.linear.cols() || sys.linear.rows() != v0.size()) {
    throw DimensionMismatch("system size does not match the initial vector");
  }
}

inline std::size_t step_count(double dt, double t_end) {
  if (t_end <= 0.0) return 0;
  return static_cast<std::size_t>(std::max(1.0, std::ceil(t_end / dt - 1e-9)));
}

inline void check_finite(const Vector& v, std::size_t step, double t) {
  if (!v.allFinite()) {
    throw NonFinite("non-finite values after step " + std::to_string(step) + " (t = " + std::to_string(t) + ")", step, t);
  }
}

}  // namespace detail

/// Solves (alpha I - beta M) x = b with a factorization reused across calls.
class ShiftedSolver {
 public:
  ShiftedSolver(const SparseMatrix& M, double alpha, double beta, LinearSolverConfig cfg) : cfg_(cfg), alpha_(alpha) {
    SparseMatrix I(M.rows(), M.cols());
    I.setIdentity();
    A_ = alpha * I - beta * M;
    bool direct = cfg_.kind == LinearSolverConfig::Kind::direct;
    if (cfg_.kind == LinearSolverConfig::Kind::automatic) {
      const double per_row = M.rows() ? static_cast<double>(M.nonZeros()) / static_cast<double>(M.rows()) : 0.0;
      direct = M.rows() <= cfg_.direct_limit || per_row <= cfg_.dense_row_limit;
    }
    if (direct) {
      factorize();
    } else {
      it_ = std::make_unique<Iterative>();
      it_->setTolerance(cfg_.tol * 0.1);
      it_->setMaxIterations(cfg_.max_iter);
      it_->compute(A_);
      if (it_->info() != Eigen::Success) throw SolverFailure("preconditioner setup failed");
    }
  }

  Vector solve(const Vector& b) const {
    Vector x = lu_ ? Vector(lu_->solve(b)) : Vector(it_->solveWithGuess(b, b / alpha_));
    if (!converged(x, b) && !lu_ && cfg_.kind == LinearSolverConfig::Kind::automatic) {
      // BiCGSTAB stalled: switch to LU for this and all later solves
      factorize();
      x = lu_->solve(b);
    }
    if (!converged(x, b)) {
      throw SolverFailure("linear solve residual " + std::to_string((A_ * x - b).norm()) +
                          " exceeds tolerance (|b| = " + std::to_string(b.norm()) + ")");
    }
    return x;
  }

  bool uses_direct() const { return lu_ != nullptr; }

 private:
  using ColMatrix = Eigen::SparseMatrix<double>;
  using Iterative = Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>>;
  LinearSolverConfig cfg_;
  double alpha_ = 1.0;
  SparseMatrix A_;
  mutable std::unique_ptr<Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>> lu_;
  std::unique_ptr<Iterative> it_;

  void factorize() const {
    lu_ = std::make_unique<Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>>();
    lu_->compute(ColMatrix(A_));
    if (lu_->info() != Eigen::Success) {
      const std::string msg = lu_->lastErrorMessage();
      lu_.reset();
      throw SolverFailure("sparse LU factorization failed: " + msg);
    }
  }

  bool converged(const Vector& x, const Vector& b) const {
    if (!x.allFinite()) return false;
    const double bnorm = b.norm(), res = (A_ * x - b).norm();
    return (bnorm == 0.0 && res == 0.0) || res <= cfg_.tol * std::max(bnorm, std::numeric_limits<double>::min());
  }
};

/// v <- v + dt F(t, v). The last step is shortened to land on t_end.
inline Vector forward_euler(const SemiDiscreteSystem& sys, const Vector& v0, const StepperConfig& cfg,
                            const StepObserver& observe = {}) {
  detail::check_config(sys, v0, cfg);
  const std::size_t n = detail::step_count(cfg.dt, cfg.t_end);
  Vector v = v0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * cfg.dt;
    const double h = i + 1 == n ? cfg.t_end - t : cfg.dt;
    v += h * sys.rhs(t, v);
    const double t1 = i + 1 == n ? cfg.t_end : t + h;
    detail::check_finite(v, i + 1, t1);
    if (observe) observe(i + 1, t1, v);
  }
  return v;
}

/// Classical four-stage Runge-Kutta, last step shortened.
inline Vector rk4(const SemiDiscreteSystem& sys, const Vector& v0, const StepperConfig& cfg,
                  const StepObserver& observe = {}) {
  detail::check_config(sys, v0, cfg);
  const std::size_t n = detail::step_count(cfg.dt, cfg.t_end);
  Vector v = v0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * cfg.dt;
    const double h = i + 1 == n ? cfg.t_end - t : cfg.dt;
    const Vector k1 = sys.rhs(t, v);
    const Vector k2 = sys.rhs(t + 0.5 * h, v + 0.5 * h * k1);
    const Vector k3 = sys.rhs(t + 0.5 * h, v + 0.5 * h * k2);
    const Vector k4 = sys.rhs(t + h, v + h * k3);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t1 = i + 1 == n ? cfg.t_end : t + h;
    detail::check_finite(v, i + 1, t1);
    if (observe) observe(i + 1, t1, v);
  }
  return v;
}

/// Uniform step used by the implicit schemes: the largest h <= dt that
/// divides t_end into whole steps.
inline double implicit_step(const StepperConfig& cfg) {
  const std::size_t n = detail::step_count(cfg.dt, cfg.t_end);
  return n == 0 ? cfg.dt : cfg.t_end / static_cast<double>(n);
}

/// (I - h M) v^{n+1} = v^n + h forcing(t_{n+1}). Linear systems only.
inline Vector backward_euler(const SemiDiscreteSystem& sys, const Vector& v0, const StepperConfig& cfg,
                             const StepObserver& observe = {}) {
  detail::check_config(sys, v0, cfg);
  if (sys.nonlinear) throw InvalidArgument("backward_euler needs a linear system; use imex_bdf2");
  const std::size_t n = detail::step_count(cfg.dt, cfg.t_end);
  Vector v = v0;
  if (n == 0) return v;
  const double h = implicit_step(cfg);
  const ShiftedSolver solver(sys.linear, 1.0, h, cfg.solver);
  for (std::size_t i = 0; i < n; ++i) {
    const double t1 = static_cast<double>(i + 1) * h;
    Vector b = v;
    if (sys.forcing) b += h * sys.forcing(t1);
    v = solver.solve(b);
    detail::check_finite(v, i + 1, t1);
    if (observe) observe(i + 1, t1, v);
  }
  return v;
}

/// Second-order semi-implicit BDF (SBDF2):
///   (3/2 I - h M) v^{n+1} = 2 v^n - v^{n-1}/2 + h (2 N^n - N^{n-1}) + h f(t_{n+1}),
/// started with one step of backward Euler on M and forward Euler on N.
/// Without a nonlinear part this is plain BDF2.
inline Vector imex_bdf2(const SemiDiscreteSystem& sys, const Vector& v0, const StepperConfig& cfg,
                        const StepObserver& observe = {}) {
  detail::check_config(sys, v0, cfg);
  const std::size_t n = detail::step_count(cfg.dt, cfg.t_end);
  Vector v = v0;
  if (n == 0) return v;
  const double h = implicit_step(cfg);

  Vector n_prev;
  if (sys.nonlinear) n_prev = sys.nonlinear(0.0, v);
  {
    const ShiftedSolver start(sys.linear, 1.0, h, cfg.solver);
    Vector b = v;
    if (sys.nonlinear) b += h * n_prev;
    if (sys.forcing) b += h * sys.forcing(h);
    Vector v1 = start.solve(b);
    detail::check_finite(v1, 1, h);
    if (observe) observe(1, h, v1);
    if (n == 1) return v1;
    std::swap(v, v1);  // v = v^1, v1 = v^0
    Vector v_prev = std::move(v1);

    const ShiftedSolver solver(sys.linear, 1.5, h, cfg.solver);
    for (std::size_t i = 1; i < n; ++i) {
      const double t = static_cast<double>(i) * h;
      const double t1 = static_cast<double>(i + 1) * h;
      Vector b = 2.0 * v - 0.5 * v_prev;
      if (sys.nonlinear) {
        Vector n_cur = sys.nonlinear(t, v);
        b += h * (2.0 * n_cur - n_prev);
        n_prev = std::move(n_cur);
      }
      if (sys.forcing) b += h * sys.forcing(t1);
      v_prev = std::move(v);
      v = solver.solve(b);
      detail::check_finite(v, i + 1, t1);
      if (observe) observe(i + 1, t1, v);
    }
  }
  return v;
}

/// Plain BDF2 on a linear system (backward-Euler start).
inline Vector bdf2(const SemiDiscreteSystem& sys, const Vector& v0, const StepperConfig& cfg,
                   const StepObserver& observe = {}) {
  if (sys.nonlinear) throw InvalidArgument("bdf2 needs a linear system; use imex_bdf2");
  return imex_bdf2(sys, v0, cfg, observe);
}

inline Vector integrate(const SemiDiscreteSystem& sys, const Vector& v0, const StepperConfig& cfg,
                        const StepObserver& observe = {}) {
  switch (cfg.scheme) {
    case Scheme::forward_euler: return forward_euler(sys, v0, cfg, observe);
    case Scheme::rk4: return rk4(sys, v0, cfg, observe);
    case Scheme::backward_euler: return backward_euler(sys, v0, cfg, observe);
    case Scheme::bdf2: return bdf2(sys, v0, cfg, observe);
    case Scheme::imex_bdf2: return imex_bdf2(sys, v0, cfg, observe);
  }
  throw InvalidArgument("unknown scheme");
}

/// Largest stable forward-Euler step predicted for the heat operator:
/// min(dx^2 / 2d, 2 / gamma).
inline double predicted_max_dt(int dim, double dx, double gamma) {
  const double diffusion = dx * dx / (2.0 * dim);
  return gamma > 0.0 ? std::min(diffusion, 2.0 / gamma) : diffusion;
}

/// Same bound for RK4, whose real stability interval is [-2.785, 0].
inline double predicted_max_dt(int dim, double dx, double gamma, Scheme scheme) {
  if (scheme == Scheme::forward_euler) return predicted_max_dt(dim, dx, gamma);
  if (scheme != Scheme::rk4) throw InvalidArgument("predicted_max_dt needs an explicit scheme");
  return predicted_max_dt(dim, dx, gamma) * (2.785 / 2.0);
}

struct StabilityScanOptions {
  /// A dt counts as stable if |v^n|_inf <= growth |v^0|_inf for all n <= steps.
  int steps = 500;
  double growth = 10.0;
  /// Bisection stops once (hi - lo) <= rel_tol * hi.
  double rel_tol = 0.005;
  std::uint64_t seed = 20130101;
};

struct StabilityScanReport {
  double gamma = 0.0;
  double dt_max_observed = 0.0;
  double dt_predicted = 0.0;
};

namespace detail {

inline bool explicit_run_stable(const SparseMatrix& op, Scheme scheme, double dt, const Vector& v0, int steps,
                                double growth) {
  const double bound = growth * v0.lpNorm<Eigen::Infinity>();
  Vector v = v0;
  for (int i = 0; i < steps; ++i) {
    if (scheme == Scheme::forward_euler) {
      v += dt * (op * v);
    } else {
      const Vector k1 = op * v;
      const Vector k2 = op * (v + 0.5 * dt * k1);
      const Vector k3 = op * (v + 0.5 * dt * k2);
      const Vector k4 = op * (v + dt * k3);
      v += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    const double norm = v.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(norm) || norm > bound) return false;
  }
  return true;
}

}  // namespace detail

/// Largest dt in (0, dt_hi] for which the explicit scheme applied to
/// dv/dt = op v stays bounded from a random start, by bisection.
/// Returns dt_hi when that step is already stable.
inline double max_stable_dt(const SparseMatrix& op, Scheme scheme, double dt_hi,
                            const StabilityScanOptions& opt = {}) {
  if (!is_explicit(scheme)) throw InvalidArgument("max_stable_dt needs an explicit scheme");
  if (!(dt_hi > 0.0)) throw InvalidArgument("dt_hi must be positive");
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v0(op.rows());
  for (Eigen::Index i = 0; i < v0.size(); ++i) v0[i] = dist(rng);

  if (detail::explicit_run_stable(op, scheme, dt_hi, v0, opt.steps, opt.growth)) return dt_hi;
  double lo = 0.0, hi = dt_hi;
  while (hi - lo > opt.rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (detail::explicit_run_stable(op, scheme, mid, v0, opt.steps, opt.growth)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace cpmol
