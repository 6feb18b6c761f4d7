#pragma once

#include <array>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "cpmol/band.hpp"
#include "cpmol/errors.hpp"

namespace cpmol {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double>;

enum class OperatorRole { laplacian, diff_forward, diff_backward, avg_forward, extension, identity, assembled };

inline std::string to_string(OperatorRole role) {
  switch (role) {
    case OperatorRole::laplacian: return "laplacian";
    case OperatorRole::diff_forward: return "diff_fwd";
    case OperatorRole::diff_backward: return "diff_bwd";
    case OperatorRole::avg_forward: return "avg_fwd";
    case OperatorRole::extension: return "extension";
    case OperatorRole::identity: return "identity";
    case OperatorRole::assembled: return "assembled";
  }
  return "unknown";
}

/// Row-compressed N x N matrix over band indices, tagged with its role.
struct SparseOperator {
  OperatorRole role = OperatorRole::assembled;
  int axis = -1;    // difference / average direction
  int degree = 0;   // interpolation degree for extension matrices
  SparseMatrix matrix;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
  Vector operator*(const Vector& v) const { return matrix * v; }
};

inline constexpr int kMaxInterpDegree = 7;

/// Barycentric Lagrange weights for nodes 0..p evaluated at t.
inline std::array<double, kMaxInterpDegree + 1> lagrange_weights(double t, int p) {
  std::array<double, kMaxInterpDegree + 1> w{};
  for (int k = 0; k <= p; ++k) {
    if (std::abs(t - k) < 1e-13) {
      w[k] = 1.0;
      return w;
    }
  }
  // barycentric weights 1 / prod_{j != k} (k - j)
  double sum = 0.0;
  for (int k = 0; k <= p; ++k) {
    double denom = 1.0;
    for (int j = 0; j <= p; ++j) {
      if (j != k) denom *= static_cast<double>(k - j);
    }
    w[k] = 1.0 / (denom * (t - k));
    sum += w[k];
  }
  for (int k = 0; k <= p; ++k) w[k] /= sum;
  return w;
}

/// Band indices and tensor-product weights interpolating at q.
struct InterpolationStencil {
  std::vector<int> nodes;
  std::vector<double> weights;
};

inline InterpolationStencil interpolation_stencil(const BandedGrid& grid, const Point& q, int p) {
  if (p < 1 || p > kMaxInterpDegree) throw InvalidArgument("interpolation degree out of range");
  const MultiIndex base = interp_stencil_base(grid, q, p);
  const int dim = grid.dim();
  std::array<std::array<double, kMaxInterpDegree + 1>, 3> w{};
  for (int a = 0; a < 3; ++a) {
    if (a < dim) {
      const double t = (q[a] - grid.origin()[a]) / grid.dx() - base[a];
      w[a] = lagrange_weights(t, p);
    } else {
      w[a][0] = 1.0;
    }
  }
  InterpolationStencil s;
  const std::size_t count = dim == 3 ? (p + 1) * (p + 1) * (p + 1) : (p + 1) * (p + 1);
  s.nodes.reserve(count);
  s.weights.reserve(count);
  detail::for_each_in_cube(base, dim, p, [&](const MultiIndex& m) {
    s.nodes.push_back(*grid.find(m));
    s.weights.push_back(w[0][m[0] - base[0]] * w[1][m[1] - base[1]] * w[2][m[2] - base[2]]);
  });
  return s;
}

/// Interpolate the band vector v at q with degree p.
inline double interpolate(const BandedGrid& grid, const Vector& v, const Point& q, int p) {
  const InterpolationStencil s = interpolation_stencil(grid, q, p);
  double sum = 0.0;
  for (std::size_t k = 0; k < s.nodes.size(); ++k) sum += s.weights[k] * v[s.nodes[k]];
  return sum;
}

inline SparseOperator identity_operator(std::size_t n) {
  SparseOperator op{OperatorRole::identity, -1, 0, SparseMatrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
  op.matrix.setIdentity();
  return op;
}

/// Closest point extension E_p: row n interpolates at cp(n).
inline SparseOperator extension_matrix(const BandedGrid& grid, int p) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  std::vector<Triplet> t;
  const int per_row = grid.dim() == 3 ? (p + 1) * (p + 1) * (p + 1) : (p + 1) * (p + 1);
  t.reserve(grid.size() * static_cast<std::size_t>(per_row));
  for (std::size_t row = 0; row < grid.size(); ++row) {
    const InterpolationStencil s = interpolation_stencil(grid, grid.cp(row).cp, p);
    for (std::size_t k = 0; k < s.nodes.size(); ++k) t.emplace_back(static_cast<int>(row), s.nodes[k], s.weights[k]);
  }
  SparseOperator op{OperatorRole::extension, -1, p, SparseMatrix(n, n)};
  op.matrix.setFromTriplets(t.begin(), t.end());
  return op;
}

inline SparseOperator extension_matrix(const BandedGrid& grid) { return extension_matrix(grid, grid.degree()); }

namespace detail {

[[noreturn]] inline void missing_neighbour(const BandedGrid& grid, std::size_t n, const char* what) {
  const MultiIndex& m = grid.node(n);
  throw MissingNeighbour(std::string(what) + ": interior node (" + std::to_string(m[0]) + ", " + std::to_string(m[1]) +
                         ", " + std::to_string(m[2]) + ") lacks a neighbour in the band");
}

/// Two-point operator: row n gets `self` at n and `other` at n + offset*e_axis.
/// Rows whose neighbour is absent stay empty (such nodes never feed an
/// interpolation stencil); an interior node without it is an error.
inline SparseOperator two_point(const BandedGrid& grid, int axis, int offset, double self, double other,
                                OperatorRole role, const char* what) {
  if (axis < 0 || axis >= grid.dim()) throw InvalidArgument(std::string(what) + ": axis out of range");
  const auto n = static_cast<Eigen::Index>(grid.size());
  std::vector<Triplet> t;
  t.reserve(2 * grid.size());
  for (std::size_t row = 0; row < grid.size(); ++row) {
    const auto nb = grid.find(shifted(grid.node(row), axis, offset));
    if (!nb) {
      if (grid.interior(row)) missing_neighbour(grid, row, what);
      continue;
    }
    t.emplace_back(static_cast<int>(row), static_cast<int>(row), self);
    t.emplace_back(static_cast<int>(row), *nb, other);
  }
  SparseOperator op{role, axis, 0, SparseMatrix(n, n)};
  op.matrix.setFromTriplets(t.begin(), t.end());
  return op;
}

}  // namespace detail

/// Second-order (2d+1)-point Laplacian. Rows of non-interior nodes with
/// an incomplete stencil are left empty.
inline SparseOperator laplacian(const BandedGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double h2 = 1.0 / (grid.dx() * grid.dx());
  const int dim = grid.dim();
  std::vector<Triplet> t;
  t.reserve(grid.size() * static_cast<std::size_t>(2 * dim + 1));
  std::array<int, 6> nbs{};
  for (std::size_t row = 0; row < grid.size(); ++row) {
    bool complete = true;
    for (int a = 0; a < dim && complete; ++a) {
      for (int s = 0; s < 2; ++s) {
        const auto nb = grid.find(detail::shifted(grid.node(row), a, s == 0 ? -1 : 1));
        if (!nb) {
          complete = false;
          break;
        }
        nbs[2 * a + s] = *nb;
      }
    }
    if (!complete) {
      if (grid.interior(row)) detail::missing_neighbour(grid, row, "laplacian");
      continue;
    }
    t.emplace_back(static_cast<int>(row), static_cast<int>(row), -2.0 * dim * h2);
    for (int k = 0; k < 2 * dim; ++k) t.emplace_back(static_cast<int>(row), nbs[k], h2);
  }
  SparseOperator op{OperatorRole::laplacian, -1, 0, SparseMatrix(n, n)};
  op.matrix.setFromTriplets(t.begin(), t.end());
  return op;
}

/// (v[n+e] - v[n]) / dx
inline SparseOperator diff_forward(const BandedGrid& grid, int axis) {
  const double h = 1.0 / grid.dx();
  return detail::two_point(grid, axis, +1, -h, h, OperatorRole::diff_forward, "diff_forward");
}

/// (v[n] - v[n-e]) / dx
inline SparseOperator diff_backward(const BandedGrid& grid, int axis) {
  const double h = 1.0 / grid.dx();
  return detail::two_point(grid, axis, -1, h, -h, OperatorRole::diff_backward, "diff_backward");
}

/// (a[n] + a[n+e]) / 2, the half-point average.
inline SparseOperator avg_forward(const BandedGrid& grid, int axis) {
  return detail::two_point(grid, axis, +1, 0.5, 0.5, OperatorRole::avg_forward, "avg_forward");
}

/// MatrixMarket coordinate dump (one-based indices).
inline void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  out.precision(17);
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
  }
}

}  // namespace cpmol
