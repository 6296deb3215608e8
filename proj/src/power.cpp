#include "bcsr/power.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace bcsr {

CouplingMatrix build_coupling(const BlockDictionary& dict, const MeasurementMatrix& phi) {
  const SensingMatrix theta = sensing_matrix(phi, dict, false);
  const Index d = dict.d;
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (Index l = 0; l < theta.blocks(); ++l) sum.noalias() += theta.block(l).adjoint() * theta.block(l);
  CouplingMatrix out;
  out.abar = sum.cwiseAbs();
  out.abar = 0.5 * (out.abar + out.abar.transpose());
  out.Mt = dict.Mt;
  out.Nr = dict.Nr;
  return out;
}

double blockwise_cost(const BlockDictionary& dict, const MeasurementMatrix& phi,
                      const RealVector& q) {
  const RealVector pbar = expand_allocation(q, dict.Nr);
  const RealMatrix FF = phi.matrix.transpose() * phi.matrix;
  double total = 0.0;
  for (Index l = 0; l < dict.L; ++l) {
    const ComplexMatrix P = dict.block(l) * pbar.asDiagonal();
    total += (P.adjoint() * FF.cast<Complex>() * P).cwiseAbs().sum();
  }
  return total;
}

RealVector expand_allocation(const RealVector& q, Index Nr) { return q.replicate(Nr, 1); }

RealMatrix fold_coupling(const CouplingMatrix& c) {
  RealMatrix B = RealMatrix::Zero(c.Mt, c.Mt);
  for (Index a = 0; a < c.abar.rows(); ++a)
    for (Index b = 0; b < c.abar.cols(); ++b) B(a % c.Mt, b % c.Mt) += c.abar(a, b);
  return B;
}

double coupling_cost(const CouplingMatrix& c, const RealVector& q) {
  const RealVector pbar = expand_allocation(q, c.Nr);
  return pbar.dot(c.abar * pbar);
}

double normalized_cost(const RealMatrix& B, const RealVector& q) {
  return q.dot(B * q) / q.squaredNorm();
}

AllocationResult allocate_uniform(const CouplingMatrix& c, double Pt) {
  AllocationResult out;
  out.method = "uniform";
  out.allocation = PowerAllocation::uniform(c.Mt, Pt);
  const RealMatrix B = fold_coupling(c);
  out.cost_before = normalized_cost(B, out.allocation.p);
  out.cost_after = out.cost_before;
  return out;
}

AllocationResult allocate_qp(const CouplingMatrix& c, double p_min, double Pt) {
  if (!(p_min > 0.0)) throw std::invalid_argument("allocate_qp: p_min must be positive");
  const Index d = c.abar.rows();
  const Index Mt = c.Mt;
  const Index Nr = c.Nr;
  AllocationResult out;
  out.method = "qp";

  RealMatrix A = c.abar;
  const double lambda_min = numerics::eig_sym(A).values.minCoeff();
  if (lambda_min < -1e-9 * std::max(1.0, A.norm())) {
    out.psd_shift = std::abs(lambda_min) + 1e-9;
    A.diagonal().array() += out.psd_shift;
  }

  // Receiver copies of each transmitter must agree with the first copy.
  numerics::QpProblem qp;
  qp.Q = 2.0 * A;
  qp.c = RealVector::Zero(d);
  qp.Aeq = RealMatrix::Zero(Mt * (Nr - 1), d);
  for (Index l = 1; l < Nr; ++l)
    for (Index i = 0; i < Mt; ++i) {
      const Index row = (l - 1) * Mt + i;
      qp.Aeq(row, i) = 1.0;
      qp.Aeq(row, l * Mt + i) = -1.0;
    }
  qp.beq = RealVector::Zero(qp.Aeq.rows());
  qp.lower = RealVector::Constant(d, p_min);

  const auto sol = numerics::solve_qp(qp);
  out.report = sol.report;
  if (sol.report.status != numerics::SolverStatus::optimal) {
    std::ostringstream msg;
    msg << "allocate_qp: " << numerics::to_string(sol.report.status) << ", primal residual "
        << sol.report.primal_residual << ", dual residual " << sol.report.dual_residual
        << ", gap " << sol.report.gap;
    throw std::runtime_error(msg.str());
  }
  out.p_hat = sol.x;
  const double alpha = std::sqrt(Pt * static_cast<double>(Nr)) / sol.x.norm();
  const RealVector scaled = alpha * sol.x;
  RealVector q = RealVector::Zero(Mt);
  for (Index l = 0; l < Nr; ++l) q += scaled.segment(l * Mt, Mt);
  q /= static_cast<double>(Nr);
  q *= std::sqrt(Pt) / q.norm();  // absorbs the equality residual
  out.allocation = {q, Pt};

  const RealMatrix B = fold_coupling(c);
  out.cost_before = normalized_cost(B, PowerAllocation::uniform(Mt, Pt).p);
  out.cost_after = normalized_cost(B, q);
  return out;
}

namespace {

// Unit vector in the positive orthant from Mt-1 hyperspherical angles.
RealVector from_angles(const RealVector& theta) {
  const Index Mt = theta.size() + 1;
  RealVector u(Mt);
  double s = 1.0;
  for (Index k = 0; k + 1 < Mt; ++k) {
    u(k) = s * std::cos(theta(k));
    s *= std::sin(theta(k));
  }
  u(Mt - 1) = s;
  return u;
}

bool lex_less(const RealVector& a, const RealVector& b) {
  for (Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

struct Candidate {
  double cost = std::numeric_limits<double>::infinity();
  RealVector u;
  RealVector theta;
};

}  // namespace

AllocationResult allocate_direct(const CouplingMatrix& c, double Pt, double floor_frac,
                                 const DirectOptions& options) {
  const Index Mt = c.Mt;
  if (!(floor_frac > 0.0) || floor_frac * std::sqrt(static_cast<double>(Mt)) > 1.0 + 1e-12)
    throw std::invalid_argument("allocate_direct: empty feasible set for this floor");
  const RealMatrix B = fold_coupling(c);
  AllocationResult out;
  out.method = "direct";
  const RealVector uniform = PowerAllocation::uniform(Mt, Pt).p;
  out.cost_before = normalized_cost(B, uniform);
  if (Mt == 1) {
    out.allocation = {RealVector::Constant(1, std::sqrt(Pt)), Pt};
    out.cost_after = out.cost_before;
    return out;
  }

  const Index dims = Mt - 1;
  const double half_pi = std::numbers::pi / 2.0;
  double step = options.angle_step;
  const double per_axis_cap = std::pow(options.max_grid_points, 1.0 / static_cast<double>(dims));
  if (half_pi / step + 1.0 > per_axis_cap) step = half_pi / (std::floor(per_axis_cap) - 1.0);
  const auto ticks = static_cast<Index>(std::floor(half_pi / step)) + 1;

  auto feasible = [&](const RealVector& u) { return u.minCoeff() >= floor_frac - 1e-15; };
  auto consider = [&](Candidate& best, const RealVector& theta) {
    const RealVector u = from_angles(theta);
    if (!feasible(u)) return;
    const double cost = u.dot(B * u);
    if (cost < best.cost || (cost == best.cost && lex_less(u, best.u))) best = {cost, u, theta};
  };

  Candidate best;
  // The uniform point is feasible whenever the set is nonempty, so the grid
  // can never do worse than it.
  {
    RealVector theta(dims);
    double rest = 1.0;
    const RealVector u = uniform / std::sqrt(Pt);
    for (Index k = 0; k < dims; ++k) {
      theta(k) = std::acos(std::clamp(u(k) / rest, -1.0, 1.0));
      rest *= std::sin(theta(k));
    }
    consider(best, theta);
  }

  std::vector<Index> idx(static_cast<std::size_t>(dims), 0);
  RealVector theta(dims);
  while (true) {
    for (Index k = 0; k < dims; ++k)
      theta(k) = std::min(static_cast<double>(idx[static_cast<std::size_t>(k)]) * step, half_pi);
    consider(best, theta);
    Index k = dims - 1;
    while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == ticks) idx[static_cast<std::size_t>(k--)] = 0;
    if (k < 0) break;
  }
  if (!std::isfinite(best.cost)) throw std::invalid_argument("allocate_direct: no feasible point found");

  // Compass search in angle space, halving the step down to 1e-12.
  for (double h = step; h > 1e-12; h /= 2.0) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (Index k = 0; k < dims; ++k)
        for (double sign : {-1.0, 1.0}) {
          RealVector trial = best.theta;
          trial(k) = std::clamp(trial(k) + sign * h, 0.0, half_pi);
          const RealVector u = from_angles(trial);
          if (!feasible(u)) continue;
          const double cost = u.dot(B * u);
          if (cost < best.cost) {
            best = {cost, u, trial};
            improved = true;
          }
        }
    }
  }

  // Moving off the uniform point has to pay for itself; rounding-level gains
  // (B proportional to I, say) are not worth an arbitrary tilt.
  const double uniform_cost = out.cost_before;
  if (best.cost >= uniform_cost - 1e-12 * std::max(1.0, std::abs(uniform_cost))) {
    out.allocation = {uniform, Pt};
    out.cost_after = out.cost_before;
    return out;
  }
  out.allocation = {best.u * (std::sqrt(Pt) / best.u.norm()), Pt};
  out.cost_after = normalized_cost(B, out.allocation.p);
  return out;
}

}  // namespace bcsr
