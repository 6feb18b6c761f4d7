#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cpmol/errors.hpp"
#include "cpmol/geometry.hpp"

namespace cpmol {

/// Integer grid coordinates (i, j, k); k = 0 in two dimensions.
using MultiIndex = std::array<int, 3>;

struct StencilSpec {
  /// Per-axis reach of the difference stencils (1 for the 5/7-point Laplacian).
  int diff_radius = 1;
  /// Degree p of the tensor-product interpolation, (p+1)^d nodes.
  int interp_degree = 3;
};

namespace detail {

inline std::uint64_t pack(const MultiIndex& m) {
  constexpr std::int64_t kOffset = 1 << 20;
  constexpr std::uint64_t kMask = (1u << 21) - 1;
  return ((static_cast<std::uint64_t>(m[0] + kOffset) & kMask) << 42) |
         ((static_cast<std::uint64_t>(m[1] + kOffset) & kMask) << 21) |
         (static_cast<std::uint64_t>(m[2] + kOffset) & kMask);
}

inline MultiIndex shifted(MultiIndex m, int axis, int by) {
  m[axis] += by;
  return m;
}

/// Calls fn(MultiIndex) for every node of the (p+1)^d cube at base.
template <class Fn>
void for_each_in_cube(const MultiIndex& base, int dim, int p, Fn&& fn) {
  const int kmax = dim == 3 ? p : 0;
  for (int i = 0; i <= p; ++i) {
    for (int j = 0; j <= p; ++j) {
      for (int k = 0; k <= kmax; ++k) fn(MultiIndex{base[0] + i, base[1] + j, base[2] + k});
    }
  }
}

}  // namespace detail

/// Radius of the computational tube for degree p interpolation and the
/// given difference reach. Every band node lies within this distance.
inline double bandwidth_for(int dim, int p, int diff_radius, double dx) {
  const double half = (p + 1) / 2.0;
  return (std::sqrt((dim - 1) * half * half + (1.0 + half) * (1.0 + half)) + diff_radius * std::sqrt(dim)) * dx;
}

/// Lower corner of the degree-p interpolation cube for the point q on a
/// grid with spacing dx. Odd p: q lies in the central cell. Even p: the
/// node nearest q is the centre of the cube.
inline MultiIndex stencil_base(const Point& q, double dx, const Point& origin, int dim, int p) {
  MultiIndex base{0, 0, 0};
  for (int a = 0; a < dim; ++a) {
    const double t = (q[a] - origin[a]) / dx;
    base[a] = p % 2 == 1 ? static_cast<int>(std::floor(t)) - (p - 1) / 2 : static_cast<int>(std::lround(t)) - p / 2;
  }
  return base;
}

/// The discrete tube B(S) of Cartesian nodes around the surface.
///
/// Nodes are sorted lexicographically by multi-index. A node is
/// `interior` when it belongs to the interpolation cube of some surface
/// point; interior nodes have complete difference stencils inside the
/// band, and every node's interpolation cube consists of interior nodes.
class BandedGrid {
 public:
  double dx() const { return dx_; }
  int dim() const { return dim_; }
  const Point& origin() const { return origin_; }
  int degree() const { return degree_; }
  int diff_radius() const { return diff_radius_; }
  double bandwidth() const { return bandwidth_; }
  const Surface& surface() const { return surface_; }

  std::size_t size() const { return nodes_.size(); }
  const std::vector<MultiIndex>& nodes() const { return nodes_; }
  const MultiIndex& node(std::size_t n) const { return nodes_[n]; }
  const std::vector<CpResult>& cp_points() const { return cp_; }
  const CpResult& cp(std::size_t n) const { return cp_[n]; }
  bool interior(std::size_t n) const { return interior_[n] != 0; }

  std::optional<int> find(const MultiIndex& m) const {
    const auto it = index_.find(detail::pack(m));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  Point coords(const MultiIndex& m) const {
    Point x = origin_;
    for (int a = 0; a < dim_; ++a) x[a] += m[a] * dx_;
    return x;
  }
  Point node_coords(std::size_t n) const { return coords(nodes_[n]); }

  /// Band vector of one closest-point coordinate.
  Eigen::VectorXd cp_component(int axis) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
    for (std::size_t n = 0; n < size(); ++n) out[static_cast<Eigen::Index>(n)] = cp_[n].cp[axis];
    return out;
  }

 private:
  friend BandedGrid build_band(const Surface&, double, const StencilSpec&, const Point&);

  BandedGrid(Surface surface) : surface_(std::move(surface)) {}

  Surface surface_;
  double dx_ = 0.0;
  int dim_ = 0;
  Point origin_ = Point::Zero();
  int degree_ = 0;
  int diff_radius_ = 0;
  double bandwidth_ = 0.0;
  std::vector<MultiIndex> nodes_;
  std::vector<CpResult> cp_;
  std::vector<char> interior_;
  std::unordered_map<std::uint64_t, int> index_;
};

/// Lower corner of the interpolation cube around q; throws OutOfBand if
/// any cube node is missing from the band.
inline MultiIndex interp_stencil_base(const BandedGrid& grid, const Point& q, int p) {
  const MultiIndex base = stencil_base(q, grid.dx(), grid.origin(), grid.dim(), p);
  detail::for_each_in_cube(base, grid.dim(), p, [&](const MultiIndex& m) {
    if (!grid.find(m)) {
      throw OutOfBand("interpolation stencil node (" + std::to_string(m[0]) + ", " + std::to_string(m[1]) + ", " +
                      std::to_string(m[2]) + ") is not in the band");
    }
  });
  return base;
}

inline MultiIndex interp_stencil_base(const BandedGrid& grid, const Point& q) {
  return interp_stencil_base(grid, q, grid.degree());
}

/// Builds the band for `surface` at spacing dx.
///
/// Construction: flood-fill the nodes within one cell diagonal of the
/// surface, collect the interpolation cubes of every grid cell (odd p)
/// or node (even p) that can contain a surface point, then add the
/// difference neighbours of those cube nodes. The result is checked
/// exhaustively for closure before it is returned.
inline BandedGrid build_band(const Surface& surface, double dx, const StencilSpec& spec,
                             const Point& origin = Point::Zero()) {
  if (!(dx > 0.0)) throw InvalidArgument("dx must be positive");
  if (spec.interp_degree < 1) throw InvalidArgument("interpolation degree must be >= 1");
  if (spec.diff_radius < 1) throw InvalidArgument("difference radius must be >= 1");

  const int dim = surface.embedding_dim();
  const int p = spec.interp_degree;
  const double diag = std::sqrt(static_cast<double>(dim)) * dx;
  const double slack = 1.0 + 1e-8;

  BandedGrid g(surface);
  g.dx_ = dx;
  g.dim_ = dim;
  g.origin_ = origin;
  g.degree_ = p;
  g.diff_radius_ = spec.diff_radius;
  g.bandwidth_ = bandwidth_for(dim, p, spec.diff_radius, dx);

  std::unordered_map<std::uint64_t, CpResult> cache;
  auto cp_at = [&](const MultiIndex& m) -> const CpResult& {
    const auto key = detail::pack(m);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, closest_point(surface, g.coords(m))).first;
    return it->second;
  };

  // 1. nodes within one cell diagonal of the surface
  std::vector<MultiIndex> near;
  {
    std::unordered_set<std::uint64_t> visited;
    std::deque<MultiIndex> queue;
    for (const SurfaceSample& s : sample_surface(surface, 64)) {
      MultiIndex corner{0, 0, 0};
      for (int a = 0; a < dim; ++a) corner[a] = static_cast<int>(std::floor((s.point[a] - origin[a]) / dx));
      detail::for_each_in_cube(corner, dim, 1, [&](const MultiIndex& m) { queue.push_back(m); });
    }
    while (!queue.empty()) {
      const MultiIndex m = queue.front();
      queue.pop_front();
      if (!visited.insert(detail::pack(m)).second) continue;
      if (cp_at(m).dist > diag * slack) continue;
      near.push_back(m);
      for (int a = 0; a < dim; ++a) {
        queue.push_back(detail::shifted(m, a, 1));
        queue.push_back(detail::shifted(m, a, -1));
      }
    }
  }

  // 2. interpolation cubes of every cell / node that may hold a surface point
  std::unordered_set<std::uint64_t> interior_keys;
  std::vector<MultiIndex> interior_nodes;
  auto add_cube = [&](const MultiIndex& base) {
    detail::for_each_in_cube(base, dim, p, [&](const MultiIndex& m) {
      if (interior_keys.insert(detail::pack(m)).second) interior_nodes.push_back(m);
    });
  };
  for (const MultiIndex& m : near) {
    if (p % 2 == 1) {
      Point centre = g.coords(m);
      for (int a = 0; a < dim; ++a) centre[a] += 0.5 * dx;
      if (closest_point(surface, centre).dist > 0.5 * diag * slack) continue;
      MultiIndex base = m;
      for (int a = 0; a < dim; ++a) base[a] -= (p - 1) / 2;
      add_cube(base);
    } else {
      if (cp_at(m).dist > 0.5 * diag * slack) continue;
      MultiIndex base = m;
      for (int a = 0; a < dim; ++a) base[a] -= p / 2;
      add_cube(base);
    }
  }

  // 3. difference neighbours
  std::unordered_set<std::uint64_t> band_keys = interior_keys;
  std::vector<MultiIndex> band = interior_nodes;
  for (const MultiIndex& m : interior_nodes) {
    for (int a = 0; a < dim; ++a) {
      for (int k = 1; k <= spec.diff_radius; ++k) {
        for (int sgn : {-1, 1}) {
          const MultiIndex nb = detail::shifted(m, a, sgn * k);
          if (band_keys.insert(detail::pack(nb)).second) band.push_back(nb);
        }
      }
    }
  }
  if (band.empty()) throw BandNotClosed("band construction found no nodes near the surface");

  std::sort(band.begin(), band.end());
  g.nodes_ = band;
  g.cp_.reserve(band.size());
  g.interior_.reserve(band.size());
  g.index_.reserve(band.size());
  for (std::size_t n = 0; n < band.size(); ++n) {
    g.cp_.push_back(cp_at(band[n]));
    g.interior_.push_back(interior_keys.count(detail::pack(band[n])) ? 1 : 0);
    g.index_.emplace(detail::pack(band[n]), static_cast<int>(n));
  }

  // 4. exhaustive closure check
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (g.cp_[n].dist > g.bandwidth_) {
      throw BandNotClosed("band node at distance " + std::to_string(g.cp_[n].dist) + " exceeds bandwidth " +
                          std::to_string(g.bandwidth_));
    }
    const MultiIndex base = stencil_base(g.cp_[n].cp, dx, origin, dim, p);
    detail::for_each_in_cube(base, dim, p, [&](const MultiIndex& m) {
      const auto idx = g.find(m);
      if (!idx || !g.interior(static_cast<std::size_t>(*idx))) {
        throw BandNotClosed("interpolation stencil of node " + std::to_string(n) + " leaves the interior band");
      }
    });
    if (!g.interior(n)) continue;
    for (int a = 0; a < dim; ++a) {
      for (int k = 1; k <= spec.diff_radius; ++k) {
        if (!g.find(detail::shifted(band[n], a, k)) || !g.find(detail::shifted(band[n], a, -k))) {
          throw BandNotClosed("difference stencil of interior node " + std::to_string(n) + " leaves the band");
        }
      }
    }
  }
  return g;
}

/// CSV dump: linear_index, i, j[, k], x, y[, z], cpx, cpy[, cpz], dist.
inline void write_band_csv(std::ostream& out, const BandedGrid& grid) {
  const char* axes[] = {"x", "y", "z"};
  const char* idx[] = {"i", "j", "k"};
  const int d = grid.dim();
  out << "linear_index";
  for (int a = 0; a < d; ++a) out << ',' << idx[a];
  for (int a = 0; a < d; ++a) out << ',' << axes[a];
  for (int a = 0; a < d; ++a) out << ",cp" << axes[a];
  out << ",dist\n";
  out.precision(17);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    out << n;
    for (int a = 0; a < d; ++a) out << ',' << grid.node(n)[a];
    const Point x = grid.node_coords(n);
    for (int a = 0; a < d; ++a) out << ',' << x[a];
    for (int a = 0; a < d; ++a) out << ',' << grid.cp(n).cp[a];
    out << ',' << grid.cp(n).dist << '\n';
  }
}

}  // namespace cpmol
