#include "bcsr/scene.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bcsr {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

// Index of `value` in `ticks` within `tol`, or -1.
Index tick_index(const std::vector<double>& ticks, double value, double tol) {
  for (std::size_t i = 0; i < ticks.size(); ++i)
    if (std::abs(ticks[i] - value) <= tol * (1.0 + std::abs(value))) return static_cast<Index>(i);
  return -1;
}

double tick_spacing(const std::vector<double>& ticks) {
  if (ticks.size() < 2) return 1.0;
  return (ticks.back() - ticks.front()) / static_cast<double>(ticks.size() - 1);
}

}  // namespace

void RadarGeometry::validate() const {
  require(!tx.empty(), "geometry: need at least one transmitter");
  require(!rx.empty(), "geometry: need at least one receiver");
  for (const auto& p : tx) require(p.allFinite(), "geometry: non-finite transmitter position");
  for (const auto& p : rx) require(p.allFinite(), "geometry: non-finite receiver position");
}

void WaveformParams::validate() const {
  require(fc > 0.0, "waveform: fc must be positive");
  require(Ts > 0.0, "waveform: Ts must be positive");
  require(Tp > 0.0 && Tp <= T, "waveform: need 0 < Tp <= T");
  require(Ns >= 1 && Np >= 1, "waveform: Ns and Np must be at least 1");
  require(static_cast<double>(Ns) * Ts <= T * (1.0 + 1e-12), "waveform: Ns*Ts exceeds T");
  require(c > 0.0, "waveform: propagation speed must be positive");
}

Index EstimationGrid::index_of(Index ix, Index iy, Index ivx, Index ivy) const {
  const auto ny = static_cast<Index>(y.size());
  const auto nvx = static_cast<Index>(vx.size());
  const auto nvy = static_cast<Index>(vy.size());
  return ((ix * ny + iy) * nvx + ivx) * nvy + ivy;
}

GridPoint EstimationGrid::point(Index h) const {
  if (h < 0 || h >= size()) throw std::out_of_range("grid index out of range");
  const auto ny = static_cast<Index>(y.size());
  const auto nvx = static_cast<Index>(vx.size());
  const auto nvy = static_cast<Index>(vy.size());
  const Index ivy = h % nvy;
  h /= nvy;
  const Index ivx = h % nvx;
  h /= nvx;
  const Index iy = h % ny;
  const Index ix = h / ny;
  return {Point2(x[static_cast<std::size_t>(ix)], y[static_cast<std::size_t>(iy)]),
          Point2(vx[static_cast<std::size_t>(ivx)], vy[static_cast<std::size_t>(ivy)])};
}

void EstimationGrid::validate() const {
  require(size() >= 1, "grid: every axis needs at least one tick");
  require(strictly_increasing(x) && strictly_increasing(y) && strictly_increasing(vx) &&
              strictly_increasing(vy),
          "grid: axis ticks must be strictly increasing");
}

PowerAllocation PowerAllocation::uniform(Index Mt, double Pt) {
  return {RealVector::Constant(Mt, std::sqrt(Pt / static_cast<double>(Mt))), Pt};
}

void Scenario::validate() const {
  geometry.validate();
  waveform.validate();
  grid.validate();
  require(K() <= L(), "scenario: more targets than grid points");
  require(powers.p.size() == Mt(), "scenario: powers must have one amplitude per transmitter");
  require((powers.p.array() >= 0.0).all(), "scenario: amplitudes must be nonnegative");
  for (const auto& t : targets) {
    require(t.position.allFinite() && t.velocity.allFinite(), "scenario: non-finite target");
    if (t.attenuation.size() != 0)
      require(t.attenuation.rows() == Mt() && t.attenuation.cols() == Nr(),
              "scenario: attenuation must be Mt x Nr");
    else
      require(t.beta_dist.has_value(), "scenario: target needs beta or beta_dist");
    for (const auto& p : geometry.tx)
      require((p - t.position).norm() > 0.0, "scenario: target coincides with a transmitter");
    for (const auto& p : geometry.rx)
      require((p - t.position).norm() > 0.0, "scenario: target coincides with a receiver");
  }
}

std::vector<Index> BlockSparseVector::support() const {
  std::vector<Index> out;
  for (Index l = 0; l < blocks(); ++l)
    if (block(l).norm() > 0.0) out.push_back(l);
  return out;
}

std::vector<GridPoint> enumerate_grid(const EstimationGrid& grid) {
  std::vector<GridPoint> out;
  out.reserve(static_cast<std::size_t>(grid.size()));
  for (double px : grid.x)
    for (double py : grid.y)
      for (double vx : grid.vx)
        for (double vy : grid.vy) out.push_back({Point2(px, py), Point2(vx, vy)});
  return out;
}

std::optional<Index> find_grid_point(const EstimationGrid& grid, const Point2& position,
                                     const Point2& velocity, double tol) {
  const Index ix = tick_index(grid.x, position.x(), tol);
  const Index iy = tick_index(grid.y, position.y(), tol);
  const Index ivx = tick_index(grid.vx, velocity.x(), tol);
  const Index ivy = tick_index(grid.vy, velocity.y(), tol);
  if (ix < 0 || iy < 0 || ivx < 0 || ivy < 0) return std::nullopt;
  return grid.index_of(ix, iy, ivx, ivy);
}

ComplexVector block_coefficients(const ComplexMatrix& attenuation) {
  const Index Mt = attenuation.rows();
  const Index Nr = attenuation.cols();
  ComplexVector out(Mt * Nr);
  for (Index l = 0; l < Nr; ++l)
    for (Index i = 0; i < Mt; ++i) out(l * Mt + i) = attenuation(i, l);
  return out;
}

BlockSparseVector ground_truth_vector(const Scenario& scenario) {
  const Index d = scenario.d();
  BlockSparseVector s{ComplexVector::Zero(scenario.L() * d), d};
  std::vector<bool> used(static_cast<std::size_t>(scenario.L()), false);
  for (const auto& t : scenario.targets) {
    const auto h = find_grid_point(scenario.grid, t.position, t.velocity);
    if (!h) throw std::invalid_argument("target not on grid");
    if (used[static_cast<std::size_t>(*h)])
      throw std::invalid_argument("two targets share grid point " + std::to_string(*h));
    used[static_cast<std::size_t>(*h)] = true;
    if (t.attenuation.rows() != scenario.Mt() || t.attenuation.cols() != scenario.Nr())
      throw std::invalid_argument("target attenuation not drawn or wrong shape");
    s.values.segment(*h * d, d) = block_coefficients(t.attenuation);
  }
  return s;
}

double noise_variance(double enr_db, Index Nr) {
  if (Nr < 1) throw std::invalid_argument("noise_variance: Nr must be at least 1");
  return 1.0 / (static_cast<double>(Nr) * std::pow(10.0, enr_db / 10.0));
}

Index nearest_grid_block(const EstimationGrid& grid, const Target& target) {
  const double sx = tick_spacing(grid.x);
  const double sy = tick_spacing(grid.y);
  const double svx = tick_spacing(grid.vx);
  const double svy = tick_spacing(grid.vy);
  Index best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  const Index L = grid.size();
  for (Index h = 0; h < L; ++h) {
    const GridPoint g = grid.point(h);
    const double dx = (g.position.x() - target.position.x()) / sx;
    const double dy = (g.position.y() - target.position.y()) / sy;
    const double dvx = (g.velocity.x() - target.velocity.x()) / svx;
    const double dvy = (g.velocity.y() - target.velocity.y()) / svy;
    const double dist = dx * dx + dy * dy + dvx * dvx + dvy * dvy;
    if (dist < best_dist) {
      best_dist = dist;
      best = h;
    }
  }
  return best;
}

ComplexMatrix sample_attenuation(const BetaDistribution& dist, Index Mt, Index Nr,
                                 std::mt19937_64& rng) {
  std::normal_distribution<double> g(dist.mean, std::sqrt(dist.var));
  ComplexMatrix out(Mt, Nr);
  for (Index l = 0; l < Nr; ++l)
    for (Index i = 0; i < Mt; ++i) {
      const double re = g(rng);
      const double im = g(rng);
      out(i, l) = Complex(re, im);
    }
  return out;
}

Scenario draw_attenuations(const Scenario& scenario, std::mt19937_64& rng) {
  Scenario out = scenario;
  for (auto& t : out.targets)
    if (t.beta_dist) t.attenuation = sample_attenuation(*t.beta_dist, out.Mt(), out.Nr(), rng);
  return out;
}

}  // namespace bcsr
