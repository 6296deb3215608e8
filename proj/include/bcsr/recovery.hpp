#pragma once

// Greedy block recovery (BMP, BOMP) and block-coherence diagnostics.

#include <optional>
#include <vector>

#include "bcsr/measurement.hpp"

namespace bcsr {

struct RecoverySolution {
  std::vector<Index> selected_blocks;  ///< in selection order; BMP may repeat
  /// One length-d coefficient vector per selected entry, de-normalized when
  /// theta was column-normalized. For BMP a repeated block has one entry per
  /// selection; `block_estimates` sums them.
  std::vector<ComplexVector> coefficients;
  std::vector<double> residual_norms;  ///< after each iteration
  int iterations = 0;
  bool rank_deficient = false;

  /// Distinct selected blocks, ascending.
  std::vector<Index> support() const;
  /// Summed coefficient estimate for block `l` (zero if never selected).
  ComplexVector block_estimate(Index l, Index d) const;
};

struct RecoveryOptions {
  int iterations = 1;
  /// Stop early once the residual norm drops below this (0 disables).
  double residual_threshold = 0.0;
};

/// Column ranges [l*d, (l+1)*d) for each block. Throws std::invalid_argument
/// if the column count is not a multiple of d.
std::vector<std::pair<Index, Index>> block_partition(Index columns, Index d);

/// argmax_l ||theta[l]^H r||, smallest l on ties. Blocks flagged in `skip`
/// are not eligible.
Index select_block(const SensingMatrix& theta, const ComplexVector& residual,
                   const std::vector<bool>* skip = nullptr);

/// All block scores ||theta[l]^H r||.
RealVector block_scores(const SensingMatrix& theta, const ComplexVector& residual);

RecoverySolution bmp(const SensingMatrix& theta, const ComplexVector& y,
                     const RecoveryOptions& options);
RecoverySolution bomp(const SensingMatrix& theta, const ComplexVector& y,
                      const RecoveryOptions& options);

inline RecoverySolution bmp(const SensingMatrix& theta, const ComplexVector& y, int K) {
  return bmp(theta, y, RecoveryOptions{K, 0.0});
}
inline RecoverySolution bomp(const SensingMatrix& theta, const ComplexVector& y, int K) {
  return bomp(theta, y, RecoveryOptions{K, 0.0});
}

/// Spectral norm of one block.
double block_spectral_norm(const SensingMatrix& theta, Index l);

/// E_b = max_l ||theta[l]||_2, plus the spread min/max for logging.
struct BlockNormStats {
  double max = 0.0;
  double min = 0.0;
};
BlockNormStats block_norm_stats(const SensingMatrix& theta);

/// ||theta[l]^H theta[r]||_2 / E_b. Pass `E_b` to avoid recomputing it.
double block_coherence(const SensingMatrix& theta, Index l, Index r,
                       std::optional<double> E_b = std::nullopt);

/// Sum over ordered pairs l != r of block_coherence.
double coherence_sum(const SensingMatrix& theta);

/// (1/E_b) * sum_l ||theta[l]^H theta[l]||_1 with the entrywise 1-norm.
double bound_cost(const SensingMatrix& theta);

}  // namespace bcsr
