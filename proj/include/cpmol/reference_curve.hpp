#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "cpmol/errors.hpp"
#include "cpmol/geometry.hpp"

namespace cpmol {

/// Solution of a curve diffusion problem on a uniform periodic parameter grid.
struct CurveSolution {
  std::vector<double> s;
  std::vector<double> u;
  std::vector<double> speed;  // J = |sigma'(s)| at the grid points
  double dt = 0.0;
  std::size_t steps = 0;
};

/// Parameter-space oracle for u_t = (1/J) d/ds( a (1/J) du/ds ), J = |sigma'|,
/// on n periodic points. Fluxes live at half points and use fourth-order
/// differences, and the divergence is the matching fourth-order
/// difference of fluxes, so sum_i J_i u_i is conserved exactly up to
/// rounding. Time stepping is classical RK4 with a step inside its
/// stability interval.
inline CurveSolution reference_curve_solver(const ParametricCurve& curve, const std::function<double(double)>& a,
                                            const std::function<double(double)>& u0, double t_end, std::size_t n) {
  if (n < 8) throw InvalidArgument("reference_curve_solver needs n >= 8");
  const double two_pi = 2.0 * std::numbers::pi;
  const double h = two_pi / static_cast<double>(n);
  const auto N = static_cast<long>(n);

  CurveSolution sol;
  sol.s.resize(n);
  sol.u.resize(n);
  sol.speed.resize(n);
  std::vector<double> coef(n);  // a / J at half points i + 1/2
  double coef_max = 0.0, speed_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double s = h * static_cast<double>(i);
    const double sh = s + 0.5 * h;
    sol.s[i] = s;
    sol.u[i] = u0(s);
    sol.speed[i] = curve.velocity(s).norm();
    coef[i] = a(sh) / curve.velocity(sh).norm();
    coef_max = std::max(coef_max, coef[i]);
    speed_min = std::min(speed_min, sol.speed[i]);
  }
  // periodic copies with two ghost cells on each side
  std::vector<double> upad(n + 4), flux(n + 4);
  auto evaluate = [&](const std::vector<double>& u, std::vector<double>& out) {
    std::copy(u.begin(), u.end(), upad.begin() + 2);
    upad[0] = u[n - 2];
    upad[1] = u[n - 1];
    upad[n + 2] = u[0];
    upad[n + 3] = u[1];
    const double* w = upad.data() + 2;
    double* f = flux.data() + 2;
    for (long i = 0; i < N; ++i) {
      // derivative at i + 1/2
      const double du = (27.0 * (w[i + 1] - w[i]) - (w[i + 2] - w[i - 1])) / (24.0 * h);
      f[i] = coef[static_cast<std::size_t>(i)] * du;
    }
    f[-2] = f[N - 2];
    f[-1] = f[N - 1];
    f[N] = f[0];
    for (long i = 0; i < N; ++i) {
      // divergence at i from fluxes at i -3/2, -1/2, +1/2, +3/2
      const double div = (27.0 * (f[i] - f[i - 1]) - (f[i + 1] - f[i - 2])) / (24.0 * h);
      out[static_cast<std::size_t>(i)] = div / sol.speed[static_cast<std::size_t>(i)];
    }
  };

  // Spectral radius bound: each fourth-order difference has symbol at most
  // (28/24)(2/h), so |lambda| <= coef_max (7/(3h))^2 / J_min.
  const double lambda_max = coef_max * std::pow(7.0 / (3.0 * h), 2) / speed_min;
  const double dt_stable = 0.5 * 2.78 / lambda_max;
  sol.steps = t_end > 0.0 ? static_cast<std::size_t>(std::ceil(t_end / dt_stable)) : 0;
  sol.dt = sol.steps > 0 ? t_end / static_cast<double>(sol.steps) : 0.0;

  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  const double dt = sol.dt;
  for (std::size_t step = 0; step < sol.steps; ++step) {
    evaluate(sol.u, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = sol.u[i] + 0.5 * dt * k1[i];
    evaluate(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = sol.u[i] + 0.5 * dt * k2[i];
    evaluate(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = sol.u[i] + dt * k3[i];
    evaluate(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) sol.u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return sol;
}

/// Discrete mass sum_i J_i u_i h conserved by the reference scheme.
inline double curve_mass(const CurveSolution& sol) {
  const double h = 2.0 * std::numbers::pi / static_cast<double>(sol.s.size());
  double m = 0.0;
  for (std::size_t i = 0; i < sol.s.size(); ++i) m += sol.speed[i] * sol.u[i];
  return m * h;
}

}  // namespace cpmol
