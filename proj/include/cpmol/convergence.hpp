#pragma once

#include <cmath>
#include <vector>

#include "cpmol/errors.hpp"

namespace cpmol {

/// Least-squares slope of log(err) against log(dx).
inline double convergence_slope(const std::vector<double>& dx, const std::vector<double>& err) {
  if (dx.size() != err.size()) throw DimensionMismatch("dx and error lists differ in length");
  if (dx.size() < 2) throw InvalidArgument("a slope needs at least two runs");
  const auto n = static_cast<double>(dx.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(dx[i] > 0.0) || !(err[i] > 0.0)) throw InvalidArgument("slope needs positive dx and error values");
    const double x = std::log(dx[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw InvalidArgument("slope needs at least two distinct dx values");
  return (n * sxy - sx * sy) / denom;
}

/// log(e_i / e_{i+1}) / log(dx_i / dx_{i+1}) for each adjacent pair.
inline std::vector<double> pairwise_orders(const std::vector<double>& dx, const std::vector<double>& err) {
  if (dx.size() != err.size()) throw DimensionMismatch("dx and error lists differ in length");
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < dx.size(); ++i) out.push_back(std::log(err[i] / err[i + 1]) / std::log(dx[i] / dx[i + 1]));
  return out;
}

}  // namespace cpmol
