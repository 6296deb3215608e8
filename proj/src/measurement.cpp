#include "bcsr/measurement.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bcsr {

MeasurementMatrix sample_gaussian_phi(Index M, Index cols, std::mt19937_64& rng) {
  if (M < 1 || M > cols) throw std::invalid_argument("sample_gaussian_phi: M out of range");
  std::normal_distribution<double> g(0.0, 1.0);
  MeasurementMatrix phi;
  phi.matrix.resize(M, cols);
  for (Index r = 0; r < M; ++r)
    for (Index c = 0; c < cols; ++c) phi.matrix(r, c) = g(rng);
  return phi;
}

ComplexVector compress(const MeasurementMatrix& phi, const ComplexVector& z) {
  if (phi.matrix.cols() != z.size()) throw std::invalid_argument("compress: dimension mismatch");
  ComplexVector y(phi.M());
  y.real() = phi.matrix * z.real();
  y.imag() = phi.matrix * z.imag();
  return y;
}

SensingMatrix sensing_matrix(const MeasurementMatrix& phi, const ComplexMatrix& psi,
                             Index block_len, bool normalize) {
  if (phi.matrix.cols() != psi.rows())
    throw std::invalid_argument("sensing_matrix: dimension mismatch");
  if (block_len < 1 || psi.cols() % block_len != 0)
    throw std::invalid_argument("sensing_matrix: columns not divisible by block length");
  SensingMatrix theta;
  theta.block_len = block_len;
  theta.matrix.resize(phi.M(), psi.cols());
  theta.matrix.real() = phi.matrix * psi.real();
  theta.matrix.imag() = phi.matrix * psi.imag();
  theta.column_norms = theta.matrix.colwise().norm().transpose();
  theta.normalized = normalize;
  if (normalize) {
    for (Index c = 0; c < theta.matrix.cols(); ++c) {
      if (!(theta.column_norms(c) > std::numeric_limits<double>::min()))
        throw std::invalid_argument("degenerate column");
      theta.matrix.col(c) /= theta.column_norms(c);
    }
  }
  return theta;
}

SensingMatrix sensing_matrix(const MeasurementMatrix& phi, const BlockDictionary& dict,
                             bool normalize) {
  return sensing_matrix(phi, dict.matrix, dict.d, normalize);
}

Index packed_size(Index n) { return n * (n + 1) / 2; }

RealVector pack_upper(const RealMatrix& F) {
  const Index n = F.rows();
  RealVector u(packed_size(n));
  Index k = 0;
  for (Index a = 0; a < n; ++a)
    for (Index b = a; b < n; ++b) u(k++) = F(a, b);
  return u;
}

RealMatrix unpack_upper(const RealVector& u, Index n) {
  if (u.size() != packed_size(n)) throw std::invalid_argument("unpack_upper: size mismatch");
  RealMatrix F(n, n);
  Index k = 0;
  for (Index a = 0; a < n; ++a)
    for (Index b = a; b < n; ++b) {
      F(a, b) = u(k);
      F(b, a) = u(k);
      ++k;
    }
  return F;
}

DesignProblem build_design_problem(const BlockDictionary& dict) {
  const ComplexMatrix& psi = dict.matrix;
  const Index n = psi.rows();
  const Index cols = psi.cols();
  DesignProblem p;
  p.n_rows = n;

  // real(conj(psi_a) psi_b) is the coefficient of F_ab; F_ba repeats it.
  p.A.resize(cols, packed_size(n));
  for (Index i = 0; i < cols; ++i) {
    const auto col = psi.col(i);
    Index k = 0;
    for (Index a = 0; a < n; ++a) {
      const Complex ca = std::conj(col(a));
      p.A(i, k++) = std::norm(col(a));
      for (Index b = a + 1; b < n; ++b) p.A(i, k++) = 2.0 * (ca * col(b)).real();
    }
  }

  // Entry (a, b) of abs((psi_k psi_k'^H)^T) is |psi_k(b)| |psi_k'(a)|. Summed
  // over ordered pairs k != k' in a block this is s s^T - W W^T with W the
  // entrywise magnitudes of the block and s its row sums.
  p.G = RealMatrix::Zero(n, n);
  for (Index h = 0; h < dict.L; ++h) {
    const RealMatrix W = dict.block(h).cwiseAbs();
    const RealVector s = W.rowwise().sum();
    p.G.noalias() += s * s.transpose();
    p.G.noalias() -= W * W.transpose();
  }
  p.G = 0.5 * (p.G + p.G.transpose());
  p.G = p.G.cwiseMax(0.0);  // clears rounding noise on entries that are exactly zero

  p.g.resize(packed_size(n));
  Index k = 0;
  for (Index a = 0; a < n; ++a) {
    p.g(k++) = p.G(a, a);
    for (Index b = a + 1; b < n; ++b) p.g(k++) = 2.0 * p.G(a, b);
  }
  return p;
}

RealVector design_constraint_values(const BlockDictionary& dict, const RealMatrix& F) {
  const ComplexMatrix FPsi = F.cast<Complex>() * dict.matrix;
  RealVector out(dict.matrix.cols());
  for (Index i = 0; i < out.size(); ++i) out(i) = dict.matrix.col(i).dot(FPsi.col(i)).real();
  return out;
}

double design_objective(const DesignProblem& problem, const RealMatrix& F) {
  return (problem.G.array() * F.array()).sum();
}

DesignResult design_F(const DesignProblem& problem, const numerics::InteriorPointOptions& options) {
  const RealVector ones = RealVector::Ones(problem.A.rows());
  const auto lp = numerics::solve_lp(problem.g, problem.A, ones, options);
  DesignResult out;
  out.report = lp.report;
  out.F = unpack_upper(lp.x, problem.n_rows);
  out.objective = problem.g.dot(lp.x);
  out.max_constraint_violation = (problem.A * lp.x - ones).cwiseAbs().maxCoeff();
  const bool feasible = out.max_constraint_violation <= numerics::kLpFeasibilityTol &&
                        lp.x.minCoeff() >= -1e-9;
  // A run that stalls at max_iter on a feasible point with a small gap is
  // still a usable design; anything else is an error.
  const bool converged =
      lp.report.status == numerics::SolverStatus::optimal ||
      (lp.report.status == numerics::SolverStatus::max_iter &&
       lp.report.gap <= numerics::kLpFeasibilityTol * (1.0 + std::abs(out.objective)));
  if (!feasible || !converged) {
    std::ostringstream msg;
    msg << "design_F: " << numerics::to_string(lp.report.status)
        << ", max constraint violation " << out.max_constraint_violation;
    throw std::runtime_error(msg.str());
  }
  return out;
}

ExtractedPhi extract_phi(const RealMatrix& F, Index M) {
  const Index n = F.rows();
  if (M < 1 || M > n) throw std::invalid_argument("extract_phi: M out of range");
  const auto eig = numerics::eig_sym(F);
  ExtractedPhi out;
  out.eigenvalues = eig.values;
  out.phi.kind = PhiKind::designed;
  out.phi.matrix.resize(M, n);
  for (Index r = 0; r < M; ++r) {
    const double lambda = eig.values(r);
    if (lambda <= 0.0) {
      out.clipped_mass += -lambda;
      ++out.phi.zero_padded_rows;
      out.phi.matrix.row(r).setZero();
    } else {
      out.phi.matrix.row(r) = std::sqrt(lambda) * eig.vectors.col(r).transpose();
    }
  }
  return out;
}

}  // namespace bcsr
