#include "bcsr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bcsr::numerics {

std::string_view to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::optimal:
      return "optimal";
    case SolverStatus::max_iter:
      return "max_iter";
    case SolverStatus::infeasible:
      return "infeasible";
    case SolverStatus::unbounded:
      return "unbounded";
  }
  return "unknown";
}

LeastSquaresResult least_squares(const ComplexMatrix& A, const ComplexVector& b) {
  if (A.rows() != b.size()) {
    throw std::invalid_argument("least_squares: dimension mismatch");
  }
  LeastSquaresResult out;
  if (A.cols() == 0) {
    out.x = ComplexVector(0);
    out.report.primal_residual = b.norm();
    out.report.objective = b.squaredNorm();
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<ComplexMatrix> cod(A);
  out.x = cod.solve(b);
  const ComplexVector r = b - A * out.x;
  out.report.rank = cod.rank();
  out.report.rank_deficient = cod.rank() < A.cols();
  out.report.primal_residual = r.norm();
  out.report.dual_residual = (A.adjoint() * r).norm();
  out.report.objective = r.squaredNorm();
  return out;
}

SymmetricEigen eig_sym(const RealMatrix& S) {
  if (S.rows() != S.cols()) {
    throw std::invalid_argument("eig_sym: matrix is not square");
  }
  const RealMatrix sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eig_sym: eigensolver did not converge");
  }
  SymmetricEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

std::vector<Index> independent_rows(const RealMatrix& A, double relative_tol) {
  std::vector<Index> rows;
  if (A.rows() == 0) return rows;
  Eigen::ColPivHouseholderQR<RealMatrix> qr(A.transpose());
  qr.setThreshold(relative_tol);
  const Index rank = qr.rank();
  const auto& perm = qr.colsPermutation().indices();
  rows.reserve(static_cast<std::size_t>(rank));
  for (Index k = 0; k < rank; ++k) rows.push_back(perm(k));
  std::sort(rows.begin(), rows.end());
  return rows;
}

namespace {

struct ReducedEqualities {
  RealMatrix A;
  RealVector b;
  std::vector<Index> kept;
  bool consistent = true;
  double inconsistency = 0.0;
};

ReducedEqualities reduce_equalities(const RealMatrix& A, const RealVector& b, double rank_tol) {
  ReducedEqualities out;
  out.kept = independent_rows(A, rank_tol);
  const Index m = static_cast<Index>(out.kept.size());
  out.A.resize(m, A.cols());
  out.b.resize(m);
  for (Index i = 0; i < m; ++i) {
    out.A.row(i) = A.row(out.kept[static_cast<std::size_t>(i)]);
    out.b(i) = b(out.kept[static_cast<std::size_t>(i)]);
  }
  if (m == A.rows()) return out;

  // Each dropped row is (numerically) a combination of kept rows; its
  // right-hand side must follow the same combination.
  std::vector<Index> dropped;
  for (Index i = 0, k = 0; i < A.rows(); ++i) {
    if (k < m && out.kept[static_cast<std::size_t>(k)] == i) {
      ++k;
    } else {
      dropped.push_back(i);
    }
  }
  if (m == 0) {
    for (Index i : dropped) out.inconsistency = std::max(out.inconsistency, std::abs(b(i)));
  } else {
    RealMatrix Ad(static_cast<Index>(dropped.size()), A.cols());
    RealVector bd(static_cast<Index>(dropped.size()));
    for (std::size_t i = 0; i < dropped.size(); ++i) {
      Ad.row(static_cast<Index>(i)) = A.row(dropped[i]);
      bd(static_cast<Index>(i)) = b(dropped[i]);
    }
    const RealMatrix gram = out.A * out.A.transpose();
    const RealMatrix weights = gram.ldlt().solve(out.A * Ad.transpose());
    const RealVector predicted = weights.transpose() * out.b;
    out.inconsistency = (predicted - bd).cwiseAbs().maxCoeff();
  }
  out.consistent = out.inconsistency <= kLpFeasibilityTol * (1.0 + b.norm());
  return out;
}

double max_step(const RealVector& v, const RealVector& dv) {
  double alpha = 1.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
  }
  return alpha;
}

// Cholesky of a normal-equations matrix with a growing diagonal shift when
// the plain factorization breaks down (near-dependent rows late in the run).
Eigen::LLT<RealMatrix> factor_normal_matrix(RealMatrix M) {
  const Index m = M.rows();
  const double scale = m > 0 ? std::max(M.diagonal().maxCoeff(), 1.0) : 1.0;
  double shift = 0.0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::LLT<RealMatrix> llt(M);
    if (llt.info() == Eigen::Success) return llt;
    const double next = shift == 0.0 ? 1e-14 * scale : shift * 10.0;
    M.diagonal().array() += next - shift;
    shift = next;
  }
  throw std::runtime_error("interior point: normal matrix is not positive definite");
}

constexpr double kDivergence = 1e12;

}  // namespace

LpResult solve_lp(const RealVector& c, const RealMatrix& Aeq, const RealVector& beq,
                  const InteriorPointOptions& options) {
  const Index n = c.size();
  if (Aeq.cols() != n || Aeq.rows() != beq.size()) {
    throw std::invalid_argument("solve_lp: dimension mismatch");
  }
  LpResult out;
  out.x = RealVector::Zero(n);
  out.y = RealVector::Zero(Aeq.rows());
  out.s = RealVector::Zero(n);

  const ReducedEqualities eq = reduce_equalities(Aeq, beq, options.rank_tolerance);
  out.report.rank = static_cast<Index>(eq.kept.size());
  out.report.rank_deficient = out.report.rank < Aeq.rows();
  if (!eq.consistent) {
    out.report.status = SolverStatus::infeasible;
    out.report.primal_residual = eq.inconsistency;
    return out;
  }
  const RealMatrix& A = eq.A;
  const RealVector& b = eq.b;
  const Index m = A.rows();

  // Mehrotra's starting point.
  RealVector x, y, s;
  if (m > 0) {
    const Eigen::LLT<RealMatrix> aat = factor_normal_matrix(A * A.transpose());
    x = A.transpose() * aat.solve(b);
    y = aat.solve(A * c);
    s = c - A.transpose() * y;
  } else {
    x = RealVector::Zero(n);
    y = RealVector::Zero(0);
    s = c;
  }
  x.array() += std::max(-1.5 * x.minCoeff(), 0.0);
  s.array() += std::max(-1.5 * s.minCoeff(), 0.0);
  {
    const double xs = x.dot(s);
    const double sx = x.sum();
    const double ss = s.sum();
    if (xs > 0.0 && sx > 0.0 && ss > 0.0) {
      x.array() += 0.5 * xs / ss;
      s.array() += 0.5 * xs / sx;
    }
    if (x.minCoeff() <= 0.0) x.array() += 1.0;
    if (s.minCoeff() <= 0.0) s.array() += 1.0;
  }

  const double b_scale = 1.0 + b.norm();
  const double c_scale = 1.0 + c.norm();
  SolverStatus status = SolverStatus::max_iter;
  int iter = 0;
  // Near a degenerate optimum the iterates can lose accuracy and blow up
  // after getting close; the best point seen is what a stalled run returns.
  double best_merit = std::numeric_limits<double>::infinity();
  RealVector best_x = x, best_y = y, best_s = s;
  for (; iter < options.max_iterations; ++iter) {
    const RealVector rp = b - A * x;
    const RealVector rd = c - A.transpose() * y - s;
    const double mu = x.dot(s) / static_cast<double>(n);
    const double pobj = c.dot(x);
    const double dobj = b.dot(y);
    if (!std::isfinite(mu) || !std::isfinite(pobj) || !std::isfinite(dobj) || !rp.allFinite() ||
        !rd.allFinite())
      break;
    const double merit = std::max({rp.norm() / b_scale, rd.norm() / c_scale,
                                   std::abs(pobj - dobj) / (1.0 + std::abs(pobj))});
    if (merit < best_merit) {
      best_merit = merit;
      best_x = x;
      best_y = y;
      best_s = s;
    }
    if (rp.norm() <= options.tolerance * b_scale && rd.norm() <= options.tolerance * c_scale &&
        std::abs(pobj - dobj) <= options.tolerance * (1.0 + std::abs(pobj))) {
      status = SolverStatus::optimal;
      break;
    }
    if (x.cwiseAbs().maxCoeff() > kDivergence) {
      status = SolverStatus::unbounded;
      break;
    }
    if ((m > 0 && y.cwiseAbs().maxCoeff() > kDivergence) || s.maxCoeff() > kDivergence) {
      status = SolverStatus::infeasible;
      break;
    }

    const RealVector d = x.cwiseQuotient(s);
    Eigen::LLT<RealMatrix> normal;
    if (m > 0) normal = factor_normal_matrix(A * d.asDiagonal() * A.transpose());

    auto newton = [&](const RealVector& rxs, RealVector& dx, RealVector& dy, RealVector& ds) {
      if (m > 0) {
        const RealVector rhs =
            rp + A * (x.cwiseProduct(rd) - rxs).cwiseQuotient(s);
        dy = normal.solve(rhs);
        ds = rd - A.transpose() * dy;
      } else {
        dy = RealVector::Zero(0);
        ds = rd;
      }
      dx = (rxs - x.cwiseProduct(ds)).cwiseQuotient(s);
    };

    RealVector dx, dy, ds;
    newton(-x.cwiseProduct(s), dx, dy, ds);
    const double ap_aff = max_step(x, dx);
    const double ad_aff = max_step(s, ds);
    const double mu_aff =
        (x + ap_aff * dx).dot(s + ad_aff * ds) / static_cast<double>(n);
    const double sigma = std::pow(mu_aff / mu, 3.0);

    const RealVector rxs = -x.cwiseProduct(s) - dx.cwiseProduct(ds) +
                           RealVector::Constant(n, sigma * mu);
    newton(rxs, dx, dy, ds);
    const double eta = std::max(0.9, 1.0 - mu);
    const double ap = std::min(1.0, eta * max_step(x, dx));
    const double ad = std::min(1.0, eta * max_step(s, ds));
    x += ap * dx;
    y += ad * dy;
    s += ad * ds;
  }

  if (status == SolverStatus::max_iter) {
    x = best_x;
    y = best_y;
    s = best_s;
  }
  out.x = x;
  out.s = s;
  for (Index i = 0; i < m; ++i) out.y(eq.kept[static_cast<std::size_t>(i)]) = y(i);
  out.report.status = status;
  out.report.iterations = iter;
  out.report.objective = c.dot(x);
  out.report.primal_residual = (beq - Aeq * x).norm();
  out.report.dual_residual = (c - A.transpose() * y - s).norm();
  out.report.gap = std::abs(c.dot(x) - b.dot(y));
  return out;
}

QpResult solve_qp(const QpProblem& problem, const InteriorPointOptions& options) {
  const Index n = problem.Q.rows();
  if (problem.Q.cols() != n || problem.lower.size() != n ||
      (problem.c.size() != 0 && problem.c.size() != n) ||
      (problem.Aeq.rows() > 0 && problem.Aeq.cols() != n) ||
      problem.Aeq.rows() != problem.beq.size()) {
    throw std::invalid_argument("solve_qp: dimension mismatch");
  }
  if (!problem.lower.allFinite()) {
    throw std::invalid_argument("solve_qp: lower bounds must be finite");
  }
  const RealMatrix Q = 0.5 * (problem.Q + problem.Q.transpose());
  const RealVector c0 = problem.c.size() == n ? problem.c : RealVector::Zero(n);
  const RealMatrix Afull = problem.Aeq.rows() > 0 ? problem.Aeq : RealMatrix(0, n);

  QpResult out;
  out.y = RealVector::Zero(Afull.rows());

  // Shift to w = x - lower >= 0.
  const RealVector q = c0 + Q * problem.lower;
  const RealVector bshift = problem.beq - Afull * problem.lower;
  const ReducedEqualities eq = reduce_equalities(Afull, bshift, options.rank_tolerance);
  out.report.rank = static_cast<Index>(eq.kept.size());
  out.report.rank_deficient = out.report.rank < Afull.rows();
  if (!eq.consistent) {
    out.x = problem.lower;
    out.z = RealVector::Zero(n);
    out.report.status = SolverStatus::infeasible;
    out.report.primal_residual = eq.inconsistency;
    return out;
  }
  const RealMatrix& A = eq.A;
  const RealVector& b = eq.b;
  const Index m = A.rows();

  RealVector w = RealVector::Ones(n);
  RealVector z = RealVector::Ones(n);
  RealVector y = RealVector::Zero(m);

  const double b_scale = 1.0 + b.norm();
  const double d_scale = 1.0 + q.norm() + Q.cwiseAbs().maxCoeff();
  SolverStatus status = SolverStatus::max_iter;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const RealVector rd = Q * w + q - A.transpose() * y - z;
    const RealVector rp = b - A * w;
    const double mu = w.dot(z) / static_cast<double>(n);
    if (rp.norm() <= options.tolerance * b_scale && rd.norm() <= options.tolerance * d_scale &&
        mu <= options.tolerance) {
      status = SolverStatus::optimal;
      break;
    }
    if (w.maxCoeff() > kDivergence) {
      status = SolverStatus::unbounded;
      break;
    }
    if ((m > 0 && y.cwiseAbs().maxCoeff() > kDivergence) || z.maxCoeff() > kDivergence) {
      status = SolverStatus::infeasible;
      break;
    }

    RealMatrix H = Q;
    H.diagonal() += z.cwiseQuotient(w);
    const Eigen::LLT<RealMatrix> hfac = factor_normal_matrix(H);
    const RealMatrix HinvAt = m > 0 ? RealMatrix(hfac.solve(A.transpose())) : RealMatrix(n, 0);
    Eigen::LLT<RealMatrix> schur;
    if (m > 0) schur = factor_normal_matrix(A * HinvAt);

    auto newton = [&](const RealVector& rxs, RealVector& dw, RealVector& dy, RealVector& dz) {
      const RealVector r1 = -rd + rxs.cwiseQuotient(w);
      const RealVector h1 = hfac.solve(r1);
      if (m > 0) {
        dy = schur.solve(rp - A * h1);
        dw = h1 + HinvAt * dy;
      } else {
        dy = RealVector::Zero(0);
        dw = h1;
      }
      dz = (rxs - z.cwiseProduct(dw)).cwiseQuotient(w);
    };

    RealVector dw, dy, dz;
    newton(-w.cwiseProduct(z), dw, dy, dz);
    const double a_aff = std::min(max_step(w, dw), max_step(z, dz));
    const double mu_aff = (w + a_aff * dw).dot(z + a_aff * dz) / static_cast<double>(n);
    const double sigma = std::pow(mu_aff / mu, 3.0);
    const RealVector rxs = -w.cwiseProduct(z) - dw.cwiseProduct(dz) +
                           RealVector::Constant(n, sigma * mu);
    newton(rxs, dw, dy, dz);
    const double eta = std::max(0.9, 1.0 - mu);
    const double alpha = std::min(1.0, eta * std::min(max_step(w, dw), max_step(z, dz)));
    w += alpha * dw;
    y += alpha * dy;
    z += alpha * dz;
  }

  out.x = w + problem.lower;
  out.z = z;
  for (Index i = 0; i < m; ++i) out.y(eq.kept[static_cast<std::size_t>(i)]) = y(i);
  out.report.status = status;
  out.report.iterations = iter;
  out.report.objective = 0.5 * out.x.dot(Q * out.x) + c0.dot(out.x);
  out.report.primal_residual =
      Afull.rows() > 0 ? (problem.beq - Afull * out.x).norm() : 0.0;
  out.report.dual_residual = (Q * w + q - A.transpose() * y - z).norm();
  out.report.gap = w.dot(z);
  return out;
}

}  // namespace bcsr::numerics
