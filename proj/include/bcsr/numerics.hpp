#pragma once

// Small dense numerical kernel: least squares, symmetric eigendecomposition,
// and primal-dual interior-point solvers for equality-constrained LPs and
// bound-constrained convex QPs. Problem sizes here are a few thousand
// variables at most, so everything is dense.

#include <string_view>
#include <vector>

#include "bcsr/types.hpp"

namespace bcsr::numerics {

enum class SolverStatus { optimal, max_iter, infeasible, unbounded };

std::string_view to_string(SolverStatus status);

struct SolverReport {
  SolverStatus status = SolverStatus::optimal;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
  /// Complementarity / duality gap at the returned point (LP and QP only).
  double gap = 0.0;
  /// Numerical rank of the system matrix (least squares) or of the
  /// equality block after presolve (LP and QP).
  Index rank = 0;
  bool rank_deficient = false;
};

// Public tolerance contract.
inline constexpr double kLeastSquaresOrthogonalityTol = 1e-8;
inline constexpr double kEigenResidualTol = 1e-8;
inline constexpr double kLpFeasibilityTol = 1e-6;
inline constexpr double kQpKktTol = 1e-6;

struct LeastSquaresResult {
  ComplexVector x;
  SolverReport report;
};

/// Minimum-norm least squares solution of A x ~= b.
///
/// Rank deficiency is reported in `report.rank_deficient`, never thrown.
/// `report.dual_residual` holds ||A^H (b - A x)||.
LeastSquaresResult least_squares(const ComplexMatrix& A, const ComplexVector& b);

struct SymmetricEigen {
  RealVector values;   ///< descending
  RealMatrix vectors;  ///< column i pairs with values(i)
};

/// Eigendecomposition of a real symmetric matrix (symmetrized internally).
SymmetricEigen eig_sym(const RealMatrix& S);

struct InteriorPointOptions {
  int max_iterations = 200;
  double tolerance = 1e-9;
  /// Relative pivot threshold used to drop dependent equality rows.
  double rank_tolerance = 1e-9;
};

struct LpResult {
  RealVector x;
  RealVector y;  ///< equality multipliers (full row count; zero on dropped rows)
  RealVector s;  ///< reduced costs
  SolverReport report;
};

/// min c^T x  s.t.  Aeq x = beq, x >= 0.
///
/// Mehrotra predictor-corrector on the normal equations. Linearly dependent
/// equality rows are removed up front; an inconsistent system is reported as
/// infeasible. The returned primal residual is measured on the full,
/// unreduced system. A run that ends without converging (iteration limit or
/// loss of finiteness) reports max_iter and returns the iterate with the
/// smallest scaled residuals and gap.
LpResult solve_lp(const RealVector& c, const RealMatrix& Aeq, const RealVector& beq,
                  const InteriorPointOptions& options = {});

struct QpProblem {
  RealMatrix Q;       ///< symmetric positive semidefinite
  RealVector c;       ///< linear term; empty means zero
  RealMatrix Aeq;     ///< may have zero rows
  RealVector beq;
  RealVector lower;   ///< finite lower bounds, one per variable
};

struct QpResult {
  RealVector x;
  RealVector y;  ///< equality multipliers
  RealVector z;  ///< bound multipliers
  SolverReport report;
};

/// min 1/2 x^T Q x + c^T x  s.t.  Aeq x = beq, x >= lower.
QpResult solve_qp(const QpProblem& problem, const InteriorPointOptions& options = {});

/// Rows of `A` that form a numerically independent subset (ascending order).
std::vector<Index> independent_rows(const RealMatrix& A, double relative_tol);

}  // namespace bcsr::numerics
