#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "cpmol/cpmol.hpp"

namespace cpmol::testing {

// Small seeded generators for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Point box(double half, int dim) {
    Point x = Point::Zero();
    for (int a = 0; a < dim; ++a) x[a] = uniform(-half, half);
    return x;
  }

  // Point at distance in [r_lo, r_hi] from the origin.
  Point shell(double r_lo, double r_hi, int dim) {
    Point d;
    do {
      d = box(1.0, dim);
    } while (d.norm() < 0.1 || d.norm() > 1.0);
    return d.normalized() * uniform(r_lo, r_hi);
  }

  Vector vector(Eigen::Index n, double lo = -1.0, double hi = 1.0) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline Vector band_function(const BandedGrid& g, const std::function<double(const Point&)>& f) {
  Vector v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t n = 0; n < g.size(); ++n) v[static_cast<Eigen::Index>(n)] = f(g.node_coords(n));
  return v;
}

inline double max_abs_over(const BandedGrid& g, const Vector& v, bool interior_only) {
  double m = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (interior_only && !g.interior(n)) continue;
    m = std::max(m, std::abs(v[static_cast<Eigen::Index>(n)]));
  }
  return m;
}

}  // namespace cpmol::testing
