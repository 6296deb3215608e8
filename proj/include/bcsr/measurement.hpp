#pragma once

// Measurement matrices (Gaussian or designed), compression y = phi z and the
// sensing matrix theta = phi Psi.

#include <cstdint>
#include <random>

#include "bcsr/dictionary.hpp"
#include "bcsr/numerics.hpp"

namespace bcsr {

enum class PhiKind { gaussian, designed };

struct MeasurementMatrix {
  RealMatrix matrix;  ///< M x (Np*Ns*Mt*Nr)
  PhiKind kind = PhiKind::gaussian;
  /// Designed matrices only: rows left at zero because F had fewer than M
  /// positive eigenvalues.
  Index zero_padded_rows = 0;

  Index M() const { return matrix.rows(); }
};

struct SensingMatrix {
  ComplexMatrix matrix;
  Index block_len = 1;
  RealVector column_norms;  ///< norms of phi*Psi before normalization
  bool normalized = false;

  Index blocks() const { return matrix.cols() / block_len; }
  auto block(Index l) const { return matrix.middleCols(l * block_len, block_len); }
};

/// i.i.d. N(0, 1) entries. Throws std::invalid_argument unless 1 <= M <= cols.
MeasurementMatrix sample_gaussian_phi(Index M, Index cols, std::mt19937_64& rng);

ComplexVector compress(const MeasurementMatrix& phi, const ComplexVector& z);

/// Throws std::invalid_argument("degenerate column") when normalizing a
/// column with zero norm.
SensingMatrix sensing_matrix(const MeasurementMatrix& phi, const ComplexMatrix& psi,
                             Index block_len, bool normalize);
SensingMatrix sensing_matrix(const MeasurementMatrix& phi, const BlockDictionary& dict,
                             bool normalize);

// The design LP works on the upper triangle of the symmetric n x n matrix F,
// packed row by row: (0,0), (0,1), ..., (0,n-1), (1,1), ...
Index packed_size(Index n);
RealVector pack_upper(const RealMatrix& F);
RealMatrix unpack_upper(const RealVector& u, Index n);

struct DesignProblem {
  /// One row per dictionary column: real(psi_i^H F psi_i) as a linear
  /// function of the packed triangle (off-diagonal coefficients doubled).
  RealMatrix A;
  /// Cost on the packed triangle, equal to sum_ab G_ab F_ab for symmetric F.
  RealVector g;
  /// Unpacked symmetric cost matrix G (nonnegative).
  RealMatrix G;
  Index n_rows = 0;
};

/// Constraints and cost for the measurement design. `dict_unit` should be
/// the unit-amplitude dictionary.
DesignProblem build_design_problem(const BlockDictionary& dict_unit);

/// real(psi_i^H F psi_i) for every dictionary column, computed directly.
RealVector design_constraint_values(const BlockDictionary& dict, const RealMatrix& F);

/// g^T vec(F) for a symmetric F.
double design_objective(const DesignProblem& problem, const RealMatrix& F);

struct DesignResult {
  RealMatrix F;
  double objective = 0.0;
  double max_constraint_violation = 0.0;
  numerics::SolverReport report;
};

/// Solves the LP. Throws std::runtime_error carrying the constraint
/// violation when the solver does not reach a feasible optimum.
DesignResult design_F(const DesignProblem& problem, const numerics::InteriorPointOptions& options = {
                          200, 1e-8, 1e-8});

struct ExtractedPhi {
  MeasurementMatrix phi;
  RealVector eigenvalues;  ///< all eigenvalues of sym(F), descending
  double clipped_mass = 0.0;  ///< sum of |negative eigenvalues| among the M kept
};

/// phi = Lambda_M^{1/2} V_M^T from the M largest eigenpairs of (F + F^T)/2,
/// negative eigenvalues clipped to zero. Rows beyond the positive spectrum
/// come out zero and are counted in `zero_padded_rows`.
ExtractedPhi extract_phi(const RealMatrix& F, Index M);

}  // namespace bcsr
