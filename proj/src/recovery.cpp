#include "bcsr/recovery.hpp"

#include <algorithm>
#include <stdexcept>

namespace bcsr {

namespace {

// Largest singular value of a small d x d (or M x d) block.
double spectral_norm(const ComplexMatrix& B) {
  if (B.size() == 0) return 0.0;
  const ComplexMatrix gram = B.adjoint() * B;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
}

ComplexVector denormalize(const SensingMatrix& theta, Index l, ComplexVector coef) {
  if (theta.normalized)
    coef = coef.cwiseQuotient(
        theta.column_norms.segment(l * theta.block_len, theta.block_len).cast<Complex>());
  return coef;
}

}  // namespace

std::vector<Index> RecoverySolution::support() const {
  std::vector<Index> out = selected_blocks;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ComplexVector RecoverySolution::block_estimate(Index l, Index d) const {
  ComplexVector out = ComplexVector::Zero(d);
  for (std::size_t k = 0; k < selected_blocks.size(); ++k)
    if (selected_blocks[k] == l) out += coefficients[k];
  return out;
}

std::vector<std::pair<Index, Index>> block_partition(Index columns, Index d) {
  if (d < 1 || columns % d != 0)
    throw std::invalid_argument("block_partition: columns not divisible by block length");
  std::vector<std::pair<Index, Index>> out;
  for (Index start = 0; start < columns; start += d) out.emplace_back(start, start + d);
  return out;
}

RealVector block_scores(const SensingMatrix& theta, const ComplexVector& residual) {
  const ComplexVector corr = theta.matrix.adjoint() * residual;
  const Index L = theta.blocks();
  RealVector scores(L);
  for (Index l = 0; l < L; ++l) scores(l) = corr.segment(l * theta.block_len, theta.block_len).norm();
  return scores;
}

Index select_block(const SensingMatrix& theta, const ComplexVector& residual,
                   const std::vector<bool>* skip) {
  const RealVector scores = block_scores(theta, residual);
  Index best = -1;
  for (Index l = 0; l < scores.size(); ++l) {
    if (skip && (*skip)[static_cast<std::size_t>(l)]) continue;
    if (best < 0 || scores(l) > scores(best)) best = l;
  }
  if (best < 0) throw std::invalid_argument("select_block: no eligible block");
  return best;
}

RecoverySolution bmp(const SensingMatrix& theta, const ComplexVector& y,
                     const RecoveryOptions& options) {
  if (options.iterations < 1) throw std::invalid_argument("bmp: need at least one iteration");
  if (y.size() != theta.matrix.rows()) throw std::invalid_argument("bmp: dimension mismatch");
  RecoverySolution sol;
  ComplexVector r = y;
  for (int it = 0; it < options.iterations; ++it) {
    if (options.residual_threshold > 0.0 && r.norm() < options.residual_threshold) break;
    const Index l = select_block(theta, r);
    const auto block = theta.block(l);
    // Coefficients from the least-squares fit of the block to the original
    // measurement; the residual is then updated by the block's projection
    // under the orthonormal-columns assumption, as a plain correlation step.
    const auto ls = numerics::least_squares(block, y);
    sol.rank_deficient = sol.rank_deficient || ls.report.rank_deficient;
    r -= block * (block.adjoint() * r);
    sol.selected_blocks.push_back(l);
    sol.coefficients.push_back(denormalize(theta, l, ls.x));
    sol.residual_norms.push_back(r.norm());
    ++sol.iterations;
  }
  return sol;
}

RecoverySolution bomp(const SensingMatrix& theta, const ComplexVector& y,
                      const RecoveryOptions& options) {
  if (options.iterations < 1) throw std::invalid_argument("bomp: need at least one iteration");
  if (y.size() != theta.matrix.rows()) throw std::invalid_argument("bomp: dimension mismatch");
  const Index d = theta.block_len;
  const Index L = theta.blocks();
  RecoverySolution sol;
  std::vector<bool> taken(static_cast<std::size_t>(L), false);
  ComplexVector r = y;
  ComplexMatrix stacked(theta.matrix.rows(), 0);
  for (int it = 0; it < options.iterations && it < L; ++it) {
    if (options.residual_threshold > 0.0 && r.norm() < options.residual_threshold) break;
    const Index l = select_block(theta, r, &taken);
    taken[static_cast<std::size_t>(l)] = true;
    sol.selected_blocks.push_back(l);
    stacked.conservativeResize(Eigen::NoChange, stacked.cols() + d);
    stacked.rightCols(d) = theta.block(l);

    const auto ls = numerics::least_squares(stacked, y);
    sol.rank_deficient = ls.report.rank_deficient;
    r = y - stacked * ls.x;
    sol.coefficients.clear();
    for (std::size_t k = 0; k < sol.selected_blocks.size(); ++k)
      sol.coefficients.push_back(denormalize(
          theta, sol.selected_blocks[k], ls.x.segment(static_cast<Index>(k) * d, d)));
    sol.residual_norms.push_back(r.norm());
    ++sol.iterations;
  }
  return sol;
}

double block_spectral_norm(const SensingMatrix& theta, Index l) {
  return spectral_norm(theta.block(l));
}

BlockNormStats block_norm_stats(const SensingMatrix& theta) {
  BlockNormStats s;
  s.min = std::numeric_limits<double>::infinity();
  for (Index l = 0; l < theta.blocks(); ++l) {
    const double v = block_spectral_norm(theta, l);
    s.max = std::max(s.max, v);
    s.min = std::min(s.min, v);
  }
  if (theta.blocks() == 0) s.min = 0.0;
  return s;
}

double block_coherence(const SensingMatrix& theta, Index l, Index r, std::optional<double> E_b) {
  const double eb = E_b ? *E_b : block_norm_stats(theta).max;
  if (eb <= 0.0) return 0.0;
  return spectral_norm(theta.block(l).adjoint() * theta.block(r)) / eb;
}

double coherence_sum(const SensingMatrix& theta) {
  const double eb = block_norm_stats(theta).max;
  if (eb <= 0.0) return 0.0;
  const Index L = theta.blocks();
  double total = 0.0;
  for (Index l = 0; l < L; ++l)
    for (Index r = l + 1; r < L; ++r)
      total += 2.0 * spectral_norm(theta.block(l).adjoint() * theta.block(r));
  return total / eb;
}

double bound_cost(const SensingMatrix& theta) {
  const double eb = block_norm_stats(theta).max;
  if (eb <= 0.0) return 0.0;
  double total = 0.0;
  for (Index l = 0; l < theta.blocks(); ++l)
    total += (theta.block(l).adjoint() * theta.block(l)).cwiseAbs().sum();
  return total / eb;
}

}  // namespace bcsr
