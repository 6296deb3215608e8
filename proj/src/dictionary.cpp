#include "bcsr/dictionary.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bcsr {

double doppler_shift(const Point2& velocity, const Point2& target, const Point2& tx,
                     const Point2& rx, double fc, double c) {
  const Point2 to_target = target - tx;
  const Point2 to_rx = rx - target;
  const double nt = to_target.norm();
  const double nr = to_rx.norm();
  if (nt == 0.0 || nr == 0.0) throw std::invalid_argument("degenerate geometry");
  const Point2 u_t = to_target / nt;
  const Point2 u_r = to_rx / nr;
  return (fc / c) * (velocity.dot(u_r) - velocity.dot(u_t));
}

double path_delay(const Point2& target, const Point2& tx, const Point2& rx, double c) {
  return ((target - tx).norm() + (target - rx).norm()) / c;
}

Complex atom_entry(double amplitude, double f, double tau, Index m, Index n,
                   const WaveformParams& wf) {
  const double slow = f * wf.slow_time(m, n);
  const double carrier = wf.fc * tau;
  // Reduce each term separately; their difference then stays within (-1, 1).
  const double cycles = (slow - std::floor(slow)) - (carrier - std::floor(carrier));
  return std::polar(amplitude, 2.0 * std::numbers::pi * cycles);
}

namespace {

// Fills the d columns of `out` for one (position, velocity).
template <typename Cols>
void fill_block(const Scenario& s, const RealVector& amplitudes, const Point2& position,
                const Point2& velocity, Cols out) {
  const auto& wf = s.waveform;
  const Index Mt = s.Mt();
  const Index Nr = s.Nr();
  for (Index l = 0; l < Nr; ++l) {
    const Point2& rx = s.geometry.rx[static_cast<std::size_t>(l)];
    for (Index i = 0; i < Mt; ++i) {
      const Point2& tx = s.geometry.tx[static_cast<std::size_t>(i)];
      const double f = doppler_shift(velocity, position, tx, rx, wf.fc, wf.c);
      const double tau = path_delay(position, tx, rx, wf.c);
      const Index col = l * Mt + i;
      for (Index m = 0; m < wf.Np; ++m)
        for (Index n = 0; n < wf.Ns; ++n) {
          const Index row = ((m * wf.Ns + n) * Nr + l) * Mt + i;
          out(row, col) = atom_entry(amplitudes(i), f, tau, m + 1, n, wf);
        }
    }
  }
}

}  // namespace

BlockDictionary build_basis(const Scenario& scenario, const RealVector& amplitudes) {
  if (amplitudes.size() != scenario.Mt())
    throw std::invalid_argument("build_basis: need one amplitude per transmitter");
  BlockDictionary dict;
  dict.Mt = scenario.Mt();
  dict.Nr = scenario.Nr();
  dict.d = scenario.d();
  dict.L = scenario.L();
  dict.Ns = scenario.waveform.Ns;
  dict.Np = scenario.waveform.Np;
  dict.matrix = ComplexMatrix::Zero(scenario.rows(), dict.L * dict.d);
  for (Index h = 0; h < dict.L; ++h) {
    const GridPoint g = scenario.grid.point(h);
    fill_block(scenario, amplitudes, g.position, g.velocity,
               dict.matrix.middleCols(h * dict.d, dict.d));
  }
  return dict;
}

BlockDictionary unit_power_basis(const Scenario& scenario) {
  return build_basis(scenario, RealVector::Ones(scenario.Mt()));
}

ComplexMatrix target_block(const Scenario& scenario, const RealVector& amplitudes,
                           const Point2& position, const Point2& velocity) {
  ComplexMatrix out = ComplexMatrix::Zero(scenario.rows(), scenario.d());
  fill_block(scenario, amplitudes, position, velocity, out.leftCols(scenario.d()));
  return out;
}

ComplexVector complex_noise(Index n, double var, std::mt19937_64& rng) {
  ComplexVector e(n);
  if (var <= 0.0) {
    e.setZero();
    return e;
  }
  std::normal_distribution<double> g(0.0, std::sqrt(var / 2.0));
  for (Index k = 0; k < n; ++k) {
    const double re = g(rng);
    const double im = g(rng);
    e(k) = Complex(re, im);
  }
  return e;
}

ComplexVector synthesize_received(const BlockDictionary& dict, const BlockSparseVector& truth,
                                  double noise_var, std::mt19937_64& rng) {
  if (truth.values.size() != dict.matrix.cols())
    throw std::invalid_argument("synthesize_received: dimension mismatch");
  ComplexVector z = ComplexVector::Zero(dict.matrix.rows());
  for (Index l : truth.support()) z.noalias() += dict.block(l) * truth.block(l);
  if (noise_var > 0.0) z += complex_noise(z.size(), noise_var, rng);
  return z;
}

ComplexVector synthesize_received(const Scenario& scenario, const BlockDictionary& dict,
                                  const BlockSparseVector& truth, std::mt19937_64& rng) {
  return synthesize_received(dict, truth, noise_variance(scenario.enr_db, scenario.Nr()), rng);
}

ComplexVector target_returns(const Scenario& scenario, const RealVector& amplitudes) {
  ComplexVector z = ComplexVector::Zero(scenario.rows());
  for (const auto& t : scenario.targets) {
    if (t.attenuation.rows() != scenario.Mt() || t.attenuation.cols() != scenario.Nr())
      throw std::invalid_argument("target_returns: attenuation not drawn");
    z += target_block(scenario, amplitudes, t.position, t.velocity) *
         block_coefficients(t.attenuation);
  }
  return z;
}

}  // namespace bcsr
