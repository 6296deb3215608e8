#pragma once

// Transmit-energy allocation against the block-coherence bound.
//
// The coupling matrix Abar is d x d with d = Mt*Nr; position l*Mt + i belongs
// to transmitter i as seen by receiver l, so an allocation q (length Mt)
// enters as pbar = [q; q; ...; q] (Nr copies).

#include <cstdint>
#include <string>

#include "bcsr/measurement.hpp"
#include "bcsr/numerics.hpp"

namespace bcsr {

struct CouplingMatrix {
  RealMatrix abar;
  Index Mt = 0;
  Index Nr = 0;
  std::uint64_t scenario_hash = 0;
  std::uint64_t phi_hash = 0;
};

/// abs(sum_l Psibar[l]^H phi^T phi Psibar[l]).
CouplingMatrix build_coupling(const BlockDictionary& dict_unit, const MeasurementMatrix& phi);

/// sum_l || H1 Psibar[l]^H phi^T phi Psibar[l] H1 ||_1 evaluated block by block
/// with H1 = diag(pbar). Independent of `build_coupling`; used to check it.
double blockwise_cost(const BlockDictionary& dict_unit, const MeasurementMatrix& phi,
                      const RealVector& q);

/// Repeats q across the Nr receiver copies.
RealVector expand_allocation(const RealVector& q, Index Nr);

/// B(i, j) = sum of Abar over all receiver-copy positions of tx i and tx j.
RealMatrix fold_coupling(const CouplingMatrix& coupling);

/// pbar^T Abar pbar.
double coupling_cost(const CouplingMatrix& coupling, const RealVector& q);

/// q^T B q / ||q||^2.
double normalized_cost(const RealMatrix& B, const RealVector& q);

struct AllocationResult {
  PowerAllocation allocation;
  std::string method;
  double cost_before = 0.0;  ///< normalized cost of the uniform allocation
  double cost_after = 0.0;   ///< normalized cost of the returned allocation
  RealVector p_hat;          ///< qp only: unscaled solution on all d positions
  double psd_shift = 0.0;    ///< qp only: diagonal shift applied to Abar
  numerics::SolverReport report;
};

AllocationResult allocate_uniform(const CouplingMatrix& coupling, double Pt);

/// min p^T Abar p  s.t.  receiver copies equal, p >= p_min; then scaled to
/// ||p||^2 = Pt*Nr and folded to Mt amplitudes. Throws std::runtime_error
/// with the KKT residuals if the solver fails.
AllocationResult allocate_qp(const CouplingMatrix& coupling, double p_min, double Pt);

/// Floor fraction giving an amplitude floor of `floor` at Pt = Mt.
inline double default_floor_frac(Index Mt, double floor = 0.1) {
  return floor / std::sqrt(static_cast<double>(Mt));
}

struct DirectOptions {
  double angle_step = 1e-3;
  /// Cap on grid points; the angle step is coarsened for large Mt.
  double max_grid_points = 1e7;
};

/// min q^T B q  s.t.  sum q_i^2 = Pt, q_i >= floor_frac*sqrt(Pt). Grid search
/// over hyperspherical angles followed by a pattern-search refinement.
/// Throws std::invalid_argument when the feasible set is empty.
AllocationResult allocate_direct(const CouplingMatrix& coupling, double Pt, double floor_frac,
                                 const DirectOptions& options = {});

}  // namespace bcsr
