#pragma once

// Radar geometry, waveform timing, the discretized estimation space and the
// target/noise model. Everything here is a plain value type.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "bcsr/types.hpp"

namespace bcsr {

inline constexpr double kSpeedOfLight = 299792458.0;

struct RadarGeometry {
  std::vector<Point2> tx;
  std::vector<Point2> rx;

  Index Mt() const { return static_cast<Index>(tx.size()); }
  Index Nr() const { return static_cast<Index>(rx.size()); }
  void validate() const;
};

// Which interval multiplies the pulse index in the slow-time Doppler phase.
// `pulse_duration` is the model as written (Tp); `pri` uses T instead.
enum class DopplerTimeBase { pulse_duration, pri };

struct WaveformParams {
  double fc = 1e9;
  double T = 0.2;
  double Tp = 0.05;
  double Ts = 2e-4;
  Index Ns = 10;
  Index Np = 4;
  DopplerTimeBase doppler_time_base = DopplerTimeBase::pulse_duration;
  double c = kSpeedOfLight;  // propagation speed

  /// Time of sample n (0-based) in pulse m (1-based) inside the Doppler phase.
  double slow_time(Index m, Index n) const {
    const double base = doppler_time_base == DopplerTimeBase::pri ? T : Tp;
    return static_cast<double>(m - 1) * base + static_cast<double>(n) * Ts;
  }
  void validate() const;
};

struct GridPoint {
  Point2 position;
  Point2 velocity;
};

struct EstimationGrid {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> vx;
  std::vector<double> vy;

  Index size() const {
    return static_cast<Index>(x.size() * y.size() * vx.size() * vy.size());
  }
  /// Grid index with x slowest and vy fastest.
  Index index_of(Index ix, Index iy, Index ivx, Index ivy) const;
  GridPoint point(Index h) const;
  void validate() const;
};

/// Complex attenuation drawn with independent real and imaginary parts,
/// each N(mean, var).
struct BetaDistribution {
  double mean = 0.407;
  double var = 0.0907;
};

struct Target {
  Point2 position = Point2::Zero();
  Point2 velocity = Point2::Zero();
  /// Mt x Nr, entry (i, l) is the tx i -> rx l attenuation. May be empty
  /// when `beta_dist` is set and nothing has been drawn yet.
  ComplexMatrix attenuation;
  std::optional<BetaDistribution> beta_dist;
};

struct PowerAllocation {
  RealVector p;  ///< transmitter amplitudes, energy of tx i is p(i)^2
  double Pt = 0.0;

  static PowerAllocation uniform(Index Mt, double Pt);
  double energy() const { return p.squaredNorm(); }
};

struct Scenario {
  RadarGeometry geometry;
  WaveformParams waveform;
  EstimationGrid grid;
  std::vector<Target> targets;
  double enr_db = 10.0;
  PowerAllocation powers;

  Index Mt() const { return geometry.Mt(); }
  Index Nr() const { return geometry.Nr(); }
  Index d() const { return Mt() * Nr(); }
  Index L() const { return grid.size(); }
  Index K() const { return static_cast<Index>(targets.size()); }
  /// Rows of the stacked observation vector, Np*Ns*Mt*Nr.
  Index rows() const { return waveform.Np * waveform.Ns * d(); }
  void validate() const;
};

struct BlockSparseVector {
  ComplexVector values;
  Index block_len = 1;

  Index blocks() const { return values.size() / block_len; }
  auto block(Index l) const { return values.segment(l * block_len, block_len); }
  /// Blocks with nonzero Euclidean norm, ascending.
  std::vector<Index> support() const;
};

std::vector<GridPoint> enumerate_grid(const EstimationGrid& grid);

/// Exact grid index of an on-grid (position, velocity), if any.
std::optional<Index> find_grid_point(const EstimationGrid& grid, const Point2& position,
                                     const Point2& velocity, double tol = 1e-9);

/// Throws std::invalid_argument for an off-grid target, a duplicated grid
/// point, or a target whose attenuation has not been drawn.
BlockSparseVector ground_truth_vector(const Scenario& scenario);

/// Per complex sample; half of it goes to each quadrature.
double noise_variance(double enr_db, Index Nr);

/// Closest grid point with each axis measured in units of its tick spacing.
Index nearest_grid_block(const EstimationGrid& grid, const Target& target);

/// Stacks an Mt x Nr attenuation into block order (receiver-major).
ComplexVector block_coefficients(const ComplexMatrix& attenuation);

/// Copy of `scenario` with fresh attenuations for every target that carries a
/// distribution. Targets with literal attenuations are left alone.
Scenario draw_attenuations(const Scenario& scenario, std::mt19937_64& rng);

ComplexMatrix sample_attenuation(const BetaDistribution& dist, Index Mt, Index Nr,
                                 std::mt19937_64& rng);

}  // namespace bcsr
