#pragma once

#include <cmath>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/SparseLU>

#include "cpmol/band.hpp"
#include "cpmol/errors.hpp"
#include "cpmol/operators.hpp"

namespace cpmol {

enum class PenaltyPolicy {
  explicit_value,  // gamma given directly
  recommended,     // gamma = 2d / dx^2
  one_over_dt,     // gamma = 1 / dt, the re-extension limit
};

inline double recommended_gamma(int dim, double dx) { return 2.0 * dim / (dx * dx); }

/// Penalty strength gamma of the -gamma (v - E v) term.
struct PenaltyConfig {
  PenaltyPolicy policy = PenaltyPolicy::recommended;
  double value = 0.0;
  /// Negative gamma can destabilise the constraint; off unless asked for.
  bool allow_negative = false;

  static PenaltyConfig fixed(double gamma) { return {PenaltyPolicy::explicit_value, gamma}; }
  static PenaltyConfig recommended() { return {PenaltyPolicy::recommended, 0.0}; }
  static PenaltyConfig ruuth_merriman() { return {PenaltyPolicy::one_over_dt, 0.0}; }

  double resolve(int dim, double dx, double dt = 0.0) const {
    double gamma = 0.0;
    switch (policy) {
      case PenaltyPolicy::explicit_value: gamma = value; break;
      case PenaltyPolicy::recommended: gamma = recommended_gamma(dim, dx); break;
      case PenaltyPolicy::one_over_dt:
        if (!(dt > 0.0)) throw InvalidArgument("gamma = 1/dt needs a positive dt");
        gamma = 1.0 / dt;
        break;
    }
    if (gamma < 0.0 && !allow_negative) throw InvalidArgument("negative gamma requires allow_negative");
    return gamma;
  }
};

namespace detail {

inline void check_square(const SparseMatrix& m, Eigen::Index n, const char* what) {
  if (m.rows() != n || m.cols() != n) {
    throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(n) + "x" + std::to_string(n) +
                            " operator, got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

inline void check_gamma(double gamma) {
  if (!std::isfinite(gamma)) throw InvalidArgument("gamma must be finite");
}

/// gamma (E - I)
inline SparseMatrix penalty(const SparseMatrix& E, double gamma) {
  SparseMatrix I(E.rows(), E.cols());
  I.setIdentity();
  return gamma * (E - I);
}

}  // namespace detail

/// M = E L - gamma (I - E) from prebuilt operators.
inline SparseOperator heat_operator(const SparseOperator& E, const SparseOperator& L, double gamma) {
  detail::check_gamma(gamma);
  detail::check_square(L.matrix, E.rows(), "heat_operator");
  SparseMatrix EL = E.matrix * L.matrix;
  return {OperatorRole::assembled, -1, E.degree, SparseMatrix(EL + detail::penalty(E.matrix, gamma))};
}

inline SparseOperator heat_operator(const BandedGrid& grid, double gamma, int p) {
  return heat_operator(extension_matrix(grid, p), laplacian(grid), gamma);
}

/// M = -E L E L - gamma (I - E). The extra E sits between the two
/// Laplacians; this is not the square of the heat operator.
inline SparseOperator biharmonic_operator(const SparseOperator& E, const SparseOperator& L, double gamma) {
  detail::check_gamma(gamma);
  detail::check_square(L.matrix, E.rows(), "biharmonic_operator");
  const SparseMatrix EL = E.matrix * L.matrix;
  const SparseMatrix ELEL = EL * EL;
  return {OperatorRole::assembled, -1, E.degree, SparseMatrix(detail::penalty(E.matrix, gamma) - ELEL)};
}

inline SparseOperator biharmonic_operator(const BandedGrid& grid, double gamma, int p) {
  return biharmonic_operator(extension_matrix(grid, p), laplacian(grid), gamma);
}

/// Conservative variable-coefficient operator sum_axis D_b diag(A_f a) D_f,
/// without extension or penalty.
inline SparseMatrix divergence_form(const BandedGrid& grid, const Vector& a) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (a.size() != n) throw DimensionMismatch("diffusivity vector length differs from band size");
  SparseMatrix sum(n, n);
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const SparseOperator Df = diff_forward(grid, axis);
    const SparseOperator Db = diff_backward(grid, axis);
    const SparseOperator Af = avg_forward(grid, axis);
    const Vector half = Af.matrix * a;
    const SparseMatrix flux = half.asDiagonal() * Df.matrix;
    const SparseMatrix term = Db.matrix * flux;
    sum += term;
  }
  return sum;
}

/// M = E sum_axis D_b (A_f a ; D_f v) - gamma (I - E).
inline SparseOperator varcoef_operator(const BandedGrid& grid, const Vector& a, double gamma, int p) {
  detail::check_gamma(gamma);
  if (a.size() != static_cast<Eigen::Index>(grid.size())) {
    throw DimensionMismatch("diffusivity vector length differs from band size");
  }
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!(a[i] > 0.0)) throw NonpositiveDiffusivity("diffusivity must be positive at every band node");
  }
  const SparseOperator E = extension_matrix(grid, p);
  const SparseMatrix div = E.matrix * divergence_form(grid, a);
  return {OperatorRole::assembled, -1, p, SparseMatrix(div + detail::penalty(E.matrix, gamma))};
}

/// Mean curvature magnitude on the band, kappa = E |L cp|_2, where L is
/// applied to each closest-point coordinate.
inline Vector curvature_field(const BandedGrid& grid, int p) {
  const SparseOperator L = laplacian(grid);
  Vector norm2 = Vector::Zero(static_cast<Eigen::Index>(grid.size()));
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const Vector lap = L.matrix * grid.cp_component(axis);
    norm2 += lap.cwiseAbs2();
  }
  const SparseOperator E = extension_matrix(grid, p);
  return E.matrix * norm2.cwiseSqrt();
}

inline Vector curvature_field(const BandedGrid& grid) { return curvature_field(grid, grid.degree()); }

/// a = 1 / (1 + |kappa|), elementwise.
inline double diffusivity_from_curvature(double kappa) { return 1.0 / (1.0 + std::abs(kappa)); }

inline Vector diffusivity_from_curvature(const Vector& kappa) {
  return kappa.unaryExpr([](double k) { return diffusivity_from_curvature(k); });
}

/// Multiplier nu_v / nu_u = 1 / (3 - 2 (kappa - c2) / (c1 - c2)), where c1
/// and c2 are the largest and smallest curvatures: 1/3 at c2, 1 at c1.
inline Vector gs_diffusivity_ratio(const Vector& kappa, double c1, double c2) {
  if (!(c1 > c2)) throw InvalidArgument("gs_diffusivity_ratio needs c1 > c2");
  return kappa.unaryExpr([=](double k) { return 1.0 / (3.0 - 2.0 / (c1 - c2) * (k - c2)); });
}

inline Vector gs_diffusivity_ratio(const Vector& kappa, double c1, double c2, double nu_u) {
  return nu_u * gs_diffusivity_ratio(kappa, c1, c2);
}

/// E L v - gamma (v - E v) = E f.
struct PoissonSystem {
  SparseOperator matrix;
  Vector rhs;
};

/// f_at_cp holds f(cp(n)) for every band node.
inline PoissonSystem poisson_system(const BandedGrid& grid, double gamma, int p, const Vector& f_at_cp) {
  if (gamma == 0.0) throw InvalidArgument("poisson_system needs gamma != 0");
  if (f_at_cp.size() != static_cast<Eigen::Index>(grid.size())) {
    throw DimensionMismatch("right-hand side length differs from band size");
  }
  const SparseOperator E = extension_matrix(grid, p);
  const SparseOperator L = laplacian(grid);
  return {heat_operator(E, L, gamma), E.matrix * f_at_cp};
}

template <class Fn>
  requires std::is_invocable_r_v<double, Fn, const Point&>
PoissonSystem poisson_system(const BandedGrid& grid, double gamma, int p, Fn&& f) {
  Vector samples(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t n = 0; n < grid.size(); ++n) samples[static_cast<Eigen::Index>(n)] = f(grid.cp(n).cp);
  return poisson_system(grid, gamma, p, samples);
}

/// Solves the Poisson system. With pin_nullspace the constant nullspace
/// is removed by bordering: [A 1; 1^T 0] [v; c] = [b; 0], so sum(v) = 0
/// and c absorbs the discrete incompatibility of b. Without it the bare
/// (singular) matrix is factorized and SingularSystem reports failure.
inline Vector solve_poisson(const PoissonSystem& system, bool pin_nullspace = true) {
  using ColMatrix = Eigen::SparseMatrix<double>;
  const SparseMatrix& A = system.matrix.matrix;
  const Eigen::Index n = A.rows();
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
  if (!pin_nullspace) {
    lu.compute(ColMatrix(A));
    if (lu.info() != Eigen::Success) throw SingularSystem("Poisson matrix factorization failed: " + lu.lastErrorMessage());
    const Vector v = lu.solve(system.rhs);
    const double res = (A * v - system.rhs).norm();
    if (!v.allFinite() || res > 1e-8 * std::max(1.0, system.rhs.norm())) {
      throw SingularSystem("Poisson solve without nullspace handling did not converge");
    }
    return v;
  }
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(A.nonZeros() + 2 * n));
  for (Eigen::Index r = 0; r < A.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    t.emplace_back(static_cast<int>(i), static_cast<int>(n), 1.0);
    t.emplace_back(static_cast<int>(n), static_cast<int>(i), 1.0);
  }
  ColMatrix bordered(n + 1, n + 1);
  bordered.setFromTriplets(t.begin(), t.end());
  lu.compute(bordered);
  if (lu.info() != Eigen::Success) throw SingularSystem("bordered Poisson factorization failed: " + lu.lastErrorMessage());
  Vector rhs(n + 1);
  rhs.head(n) = system.rhs;
  rhs[n] = 0.0;
  const Vector sol = lu.solve(rhs);
  if (!sol.allFinite()) throw SingularSystem("bordered Poisson solve produced non-finite values");
  return sol.head(n);
}

}  // namespace cpmol
