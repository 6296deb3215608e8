#pragma once

// Independent reference computations used only by the test suites. Nothing
// here calls into the interior-point solvers or the recovery code it checks.

#include <optional>
#include <random>

#include "bcsr/types.hpp"

namespace bcsr::oracle {

/// Optimal objective of min c^T x, Ax = b, x >= 0 by enumerating every
/// basic feasible solution. Requires A to have full row rank; small n only.
std::optional<double> lp_by_vertex_enumeration(const RealVector& c, const RealMatrix& A,
                                               const RealVector& b, RealVector* argmin = nullptr);

/// Optimal objective of min 1/2 x^T Q x + c^T x, Ax = b, x >= lower by
/// enumerating every set of active bounds and solving the KKT system of
/// the resulting equality-constrained problem.
std::optional<double> qp_by_active_sets(const RealMatrix& Q, const RealVector& c,
                                        const RealMatrix& A, const RealVector& b,
                                        const RealVector& lower, RealVector* argmin = nullptr);

/// Least squares through the normal equations with an explicit inverse.
ComplexVector ls_normal_equations(const ComplexMatrix& A, const ComplexVector& b);

/// Largest KKT violation of an LP primal-dual triple (scaled).
double lp_kkt_violation(const RealVector& c, const RealMatrix& A, const RealVector& b,
                        const RealVector& x, const RealVector& y, const RealVector& s);

/// Spectral norm via a full SVD.
double spectral_norm_svd(const ComplexMatrix& M);

/// Random complex Gaussian matrix.
ComplexMatrix random_complex(Index rows, Index cols, std::mt19937_64& rng);

/// Random matrix with orthonormal columns (rows >= cols).
ComplexMatrix random_orthonormal(Index rows, Index cols, std::mt19937_64& rng);

}  // namespace bcsr::oracle
