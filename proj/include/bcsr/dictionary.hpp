#pragma once

// The grid dictionary Psi and synthesis of stacked matched-filter outputs.
//
// Row order is time-major: row ((m*Ns + n)*Nr + l)*Mt + i holds pulse m
// (0-based here), sample n, receiver l, matched filter i. Column
// (h*Nr + l)*Mt + i is grid point h seen on the tx i -> rx l path, so each
// block of d = Mt*Nr columns is one grid point.

#include <random>
#include <string_view>

#include "bcsr/scene.hpp"

namespace bcsr {

/// Bistatic Doppler shift in Hz. Throws std::invalid_argument
/// ("degenerate geometry") if the target sits on the transmitter or receiver.
double doppler_shift(const Point2& velocity, const Point2& target, const Point2& tx,
                     const Point2& rx, double fc, double c = kSpeedOfLight);

/// Two-way path delay in seconds.
double path_delay(const Point2& target, const Point2& tx, const Point2& rx,
                  double c = kSpeedOfLight);

/// Single dictionary entry. `m` is the 1-based pulse index, `n` the 0-based
/// sample index. The phase is reduced modulo one cycle before the exponential
/// so large fc*tau products do not lose precision.
Complex atom_entry(double amplitude, double f, double tau, Index m, Index n,
                   const WaveformParams& wf);

struct BlockDictionary {
  static constexpr std::string_view kRowOrder = "time-major:m,n,rx,tx";

  ComplexMatrix matrix;
  Index L = 0;
  Index d = 0;
  Index Mt = 0;
  Index Nr = 0;
  Index Ns = 0;
  Index Np = 0;

  Index row_index(Index m, Index n, Index l, Index i) const {
    return ((m * Ns + n) * Nr + l) * Mt + i;
  }
  Index column_index(Index h, Index l, Index i) const { return (h * Nr + l) * Mt + i; }
  auto block(Index h) const { return matrix.middleCols(h * d, d); }
};

/// Psi for the scenario's grid with the given per-transmitter amplitudes.
BlockDictionary build_basis(const Scenario& scenario, const RealVector& amplitudes);

/// Psi with every amplitude equal to one.
BlockDictionary unit_power_basis(const Scenario& scenario);

/// The d columns for an arbitrary (position, velocity), laid out like one
/// dictionary block. Used to synthesize off-grid returns.
ComplexMatrix target_block(const Scenario& scenario, const RealVector& amplitudes,
                           const Point2& position, const Point2& velocity);

/// Circular complex Gaussian noise, total variance `var` per entry.
ComplexVector complex_noise(Index n, double var, std::mt19937_64& rng);

/// z = Psi s + e with e at the given per-entry variance.
ComplexVector synthesize_received(const BlockDictionary& dict, const BlockSparseVector& truth,
                                  double noise_var, std::mt19937_64& rng);

/// Same, with the variance taken from the scenario's ENR.
ComplexVector synthesize_received(const Scenario& scenario, const BlockDictionary& dict,
                                  const BlockSparseVector& truth, std::mt19937_64& rng);

/// Noise-free return of the scenario's targets at their true (possibly
/// off-grid) parameters. Attenuations must already be drawn.
ComplexVector target_returns(const Scenario& scenario, const RealVector& amplitudes);

}  // namespace bcsr
