#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <random>

#include "bcsr/dictionary.hpp"
#include "bcsr/matrix_io.hpp"
#include "bcsr/scenario_io.hpp"

namespace bcsr {
namespace {

Scenario reference_scenario() { return load_scenario(BCSR_SOURCE_DIR "/scenarios/reference_on_grid.json"); }

// Entry straight from the model without any phase reduction.
Complex direct_entry(double p, double f, double tau, Index m, Index n, const WaveformParams& wf) {
  const double t = (m - 1) * wf.Tp + n * wf.Ts;
  return p * std::exp(Complex(0.0, 2.0 * std::numbers::pi * (f * t - wf.fc * tau)));
}

TEST(DopplerShift, StationaryTargetIsZero) {
  EXPECT_EQ(doppler_shift(Point2(0, 0), Point2(100, 260), Point2(100, 0), Point2(0, 100), 1e9), 0.0);
}

TEST(DopplerShift, MonostaticHandExample) {
  const double f = doppler_shift(Point2(0, 150), Point2(0, 300), Point2(0, 0), Point2(0, 0), 1e9, 3e8);
  EXPECT_NEAR(f, -1000.0, 1e-9);
}

TEST(DopplerShift, CrossingMotionIsZero) {
  // Collinear along x, velocity along y.
  const double f = doppler_shift(Point2(0, 50), Point2(100, 0), Point2(0, 0), Point2(300, 0), 1e9);
  EXPECT_NEAR(f, 0.0, 1e-12);
}

TEST(DopplerShift, DegenerateGeometryThrows) {
  EXPECT_THROW(doppler_shift(Point2(1, 1), Point2(0, 0), Point2(0, 0), Point2(5, 5), 1e9),
               std::invalid_argument);
  EXPECT_THROW(doppler_shift(Point2(1, 1), Point2(5, 5), Point2(0, 0), Point2(5, 5), 1e9),
               std::invalid_argument);
}

TEST(DopplerShift, SwappingRolesWithReversedVelocityNegates) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-500, 500);
  for (int k = 0; k < 200; ++k) {
    const Point2 p(u(rng), u(rng)), t(u(rng), u(rng)), r(u(rng), u(rng)), v(u(rng), u(rng));
    const double f = doppler_shift(v, p, t, r, 1e9);
    const double g = doppler_shift(-v, p, r, t, 1e9);
    EXPECT_NEAR(f, -g, 1e-9 * (1.0 + std::abs(f)));
  }
}

TEST(PathDelay, Examples) {
  EXPECT_EQ(path_delay(Point2(3, 4), Point2(3, 4), Point2(3, 4)), 0.0);
  const double tau = path_delay(Point2(100, 260), Point2(100, 0), Point2(0, 100), 3e8);
  EXPECT_NEAR(tau, (260.0 + std::sqrt(35600.0)) / 3e8, 1e-20);
  // The worked figure rounds to 1.4956e-6.
  EXPECT_NEAR(tau, 1.4956e-6, 1e-10);
}

TEST(PathDelay, HomogeneousAndSymmetric) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-500, 500);
  for (int k = 0; k < 200; ++k) {
    const Point2 p(u(rng), u(rng)), t(u(rng), u(rng)), r(u(rng), u(rng));
    const double tau = path_delay(p, t, r);
    EXPECT_NEAR(path_delay(2 * p, 2 * t, 2 * r), 2 * tau, 1e-15 * (1 + tau));
    EXPECT_DOUBLE_EQ(path_delay(p, t, r), path_delay(p, r, t));
  }
}

TEST(AtomEntry, Examples) {
  WaveformParams wf;
  wf.Ts = 2e-4;
  // fc*tau integer, f = 0.
  const Complex a = atom_entry(1.7, 0.0, 3.0 / wf.fc, 1, 0, wf);
  EXPECT_NEAR(std::abs(a - Complex(1.7, 0.0)), 0.0, 1e-12);
  EXPECT_EQ(atom_entry(0.0, 123.0, 1e-6, 2, 3, wf), Complex(0.0, 0.0));
  const Complex b = atom_entry(1.0, 100.0, 0.0, 1, 5, wf);
  EXPECT_NEAR(std::abs(b - std::exp(Complex(0, 0.2 * std::numbers::pi))), 0.0, 1e-12);
  EXPECT_NEAR(std::arg(b), 0.6283, 1e-4);
}

TEST(AtomEntry, MatchesDirectFormulaAndHasExactMagnitude) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> f(-3000, 3000), tau(0, 2e-6), p(0.1, 2);
  WaveformParams wf;
  for (int k = 0; k < 1000; ++k) {
    const double pk = p(rng), fk = f(rng), tk = tau(rng);
    const Index m = 1 + k % 4, n = k % 10;
    const Complex a = atom_entry(pk, fk, tk, m, n, wf);
    EXPECT_NEAR(std::abs(a), pk, 1e-14);
    EXPECT_NEAR(std::abs(a - direct_entry(pk, fk, tk, m, n, wf)), 0.0, 1e-9);
  }
}

TEST(AtomEntry, PriTimeBaseUsesT) {
  WaveformParams wf;
  wf.doppler_time_base = DopplerTimeBase::pri;
  const Complex a = atom_entry(1.0, 2.5, 0.0, 2, 0, wf);  // phase 2.5 * 0.2 = 0.5 cycle
  EXPECT_NEAR(std::abs(a - Complex(-1.0, 0.0)), 0.0, 1e-12);
}

TEST(BuildBasis, ReferenceDimensions) {
  const Scenario s = reference_scenario();
  const auto dict = unit_power_basis(s);
  EXPECT_EQ(dict.matrix.rows(), 160);
  EXPECT_EQ(dict.matrix.cols(), 576);
  EXPECT_EQ(dict.L, 144);
  EXPECT_EQ(dict.d, 4);
}

TEST(BuildBasis, TrivialOneByOne) {
  Scenario s = reference_scenario();
  s.geometry.tx.resize(1);
  s.geometry.rx.resize(1);
  s.waveform.Np = 1;
  s.waveform.Ns = 1;
  s.grid = {{90}, {270}, {110}, {120}};
  s.powers = PowerAllocation::uniform(1, 1.0);
  const auto dict = build_basis(s, RealVector::Constant(1, 0.8));
  ASSERT_EQ(dict.matrix.rows(), 1);
  ASSERT_EQ(dict.matrix.cols(), 1);
  const Point2 pos(90, 270), vel(110, 120);
  const auto& wf = s.waveform;
  const double f = doppler_shift(vel, pos, s.geometry.tx[0], s.geometry.rx[0], wf.fc);
  const double tau = path_delay(pos, s.geometry.tx[0], s.geometry.rx[0]);
  EXPECT_EQ(dict.matrix(0, 0), atom_entry(0.8, f, tau, 1, 0, wf));
}

TEST(BuildBasis, ColumnSupportAndMagnitudes) {
  const Scenario s = reference_scenario();
  const RealVector p = (RealVector(2) << 1.3, 0.4).finished();
  const auto dict = build_basis(s, p);
  for (Index h = 0; h < dict.L; ++h)
    for (Index l = 0; l < dict.Nr; ++l)
      for (Index i = 0; i < dict.Mt; ++i) {
        const auto col = dict.matrix.col(dict.column_index(h, l, i));
        Index nonzero = 0;
        for (Index r = 0; r < col.size(); ++r) {
          if (col(r) == Complex(0.0, 0.0)) continue;
          ++nonzero;
          EXPECT_NEAR(std::abs(col(r)), p(i), 1e-14);
          // Row belongs to matched filter i at receiver l.
          EXPECT_EQ(r % dict.Mt, i);
          EXPECT_EQ((r / dict.Mt) % dict.Nr, l);
        }
        EXPECT_EQ(nonzero, s.waveform.Np * s.waveform.Ns);
      }
}

TEST(BuildBasis, EntriesMatchIndependentFormula) {
  const Scenario s = reference_scenario();
  const auto dict = unit_power_basis(s);
  const auto& wf = s.waveform;
  for (Index h : {Index(0), Index(38), Index(104), Index(143)}) {
    const GridPoint g = s.grid.point(h);
    for (Index l = 0; l < 2; ++l)
      for (Index i = 0; i < 2; ++i) {
        const Point2& t = s.geometry.tx[static_cast<std::size_t>(i)];
        const Point2& r = s.geometry.rx[static_cast<std::size_t>(l)];
        const Point2 ut = (g.position - t).normalized();
        const Point2 ur = (r - g.position).normalized();
        const double f = wf.fc / kSpeedOfLight * (g.velocity.dot(ur) - g.velocity.dot(ut));
        const double tau = ((g.position - t).norm() + (g.position - r).norm()) / kSpeedOfLight;
        for (Index m = 0; m < wf.Np; ++m)
          for (Index n = 0; n < wf.Ns; ++n) {
            const Index row = ((m * wf.Ns + n) * 2 + l) * 2 + i;
            const Complex got = dict.matrix(row, (h * 2 + l) * 2 + i);
            EXPECT_NEAR(std::abs(got - direct_entry(1.0, f, tau, m + 1, n, wf)), 0.0, 1e-9);
          }
      }
  }
}

TEST(UnitPowerBasis, UnitModulusAndColumnNorms) {
  const Scenario s = reference_scenario();
  const auto dict = unit_power_basis(s);
  const double expected = std::sqrt(static_cast<double>(s.waveform.Np * s.waveform.Ns));
  for (Index c = 0; c < dict.matrix.cols(); ++c) EXPECT_NEAR(dict.matrix.col(c).norm(), expected, 1e-12);
  const auto ones = build_basis(s, RealVector::Ones(2));
  EXPECT_EQ(ones.matrix, dict.matrix);
}

TEST(UnitPowerBasis, ScaledBlocksMatchPoweredBasis) {
  const Scenario s = reference_scenario();
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  const auto unit = unit_power_basis(s);
  for (int trial = 0; trial < 5; ++trial) {
    const RealVector p = (RealVector(2) << u(rng), u(rng)).finished();
    const auto dict = build_basis(s, p);
    const RealVector h1 = p.replicate(s.Nr(), 1);
    for (Index h = 0; h < dict.L; ++h) {
      const ComplexMatrix expected = unit.block(h) * h1.asDiagonal();
      EXPECT_LE((dict.block(h) - expected).norm(), 1e-12 * expected.norm());
    }
  }
}

TEST(Synthesize, NoiselessEqualsPsiS) {
  Scenario s = reference_scenario();
  std::mt19937_64 rng(35);
  s = draw_attenuations(s, rng);
  const auto dict = unit_power_basis(s);
  const auto truth = ground_truth_vector(s);
  const ComplexVector z = synthesize_received(dict, truth, 0.0, rng);
  EXPECT_LE((z - dict.matrix * truth.values).norm(), 1e-12 * z.norm());
  // Infinite ENR is the same thing.
  s.enr_db = std::numeric_limits<double>::infinity();
  const ComplexVector z2 = synthesize_received(s, dict, truth, rng);
  EXPECT_EQ(z, z2);
}

TEST(Synthesize, PureNoiseHasRequestedVariance) {
  const Scenario s = reference_scenario();
  const auto dict = unit_power_basis(s);
  BlockSparseVector zero{ComplexVector::Zero(dict.matrix.cols()), dict.d};
  std::mt19937_64 rng(36);
  const double var = noise_variance(3.0, 2);
  double sum = 0.0, sum_re = 0.0;
  Index count = 0;
  for (int rep = 0; rep < 100; ++rep) {  // 16000 samples
    const ComplexVector z = synthesize_received(dict, zero, var, rng);
    sum += z.squaredNorm();
    sum_re += z.real().squaredNorm();
    count += z.size();
  }
  // |e|^2 is exponential with mean var, so its sample mean has sd var/sqrt(n).
  const double est = sum / count;
  EXPECT_NEAR(est, var, 3.0 * var / std::sqrt(static_cast<double>(count)));
  EXPECT_NEAR(sum_re / count, var / 2.0, 3.0 * var / std::sqrt(2.0 * count));
}

TEST(Synthesize, SeedDeterminism) {
  Scenario s = reference_scenario();
  std::mt19937_64 a(37), b(37);
  const auto sa = draw_attenuations(s, a);
  const auto sb = draw_attenuations(s, b);
  const auto dict = unit_power_basis(s);
  const ComplexVector za = synthesize_received(sa, dict, ground_truth_vector(sa), a);
  const ComplexVector zb = synthesize_received(sb, dict, ground_truth_vector(sb), b);
  ASSERT_EQ(za.size(), zb.size());
  EXPECT_EQ(0, std::memcmp(za.data(), zb.data(), sizeof(Complex) * static_cast<std::size_t>(za.size())));
}

TEST(Synthesize, DimensionMismatchThrows) {
  const Scenario s = reference_scenario();
  const auto dict = unit_power_basis(s);
  BlockSparseVector bad{ComplexVector::Zero(8), 4};
  std::mt19937_64 rng(1);
  EXPECT_THROW(synthesize_received(dict, bad, 0.0, rng), std::invalid_argument);
}

TEST(TargetReturns, OnGridMatchesDictionary) {
  Scenario s = reference_scenario();
  std::mt19937_64 rng(38);
  s = draw_attenuations(s, rng);
  const RealVector p = (RealVector(2) << 1.2, 0.7).finished();
  const auto dict = build_basis(s, p);
  const ComplexVector expected = dict.matrix * ground_truth_vector(s).values;
  EXPECT_LE((target_returns(s, p) - expected).norm(), 1e-12 * expected.norm());
}

TEST(MatrixIo, RoundTripAndHashCheck) {
  const auto dir = std::filesystem::temp_directory_path() / "bcsr_matrix_io_test";
  std::filesystem::create_directories(dir);
  const Scenario s = reference_scenario();
  const auto dict = unit_power_basis(s);
  const auto hash = scenario_hash(s);
  write_matrix(dir / "psi.bin", dict.matrix, hash, std::string(BlockDictionary::kRowOrder));
  const auto header = read_matrix_header(dir / "psi.bin");
  EXPECT_EQ(header.rows, 160u);
  EXPECT_EQ(header.cols, 576u);
  EXPECT_EQ(header.ordering, BlockDictionary::kRowOrder);
  EXPECT_EQ(read_complex_matrix(dir / "psi.bin", hash), dict.matrix);
  EXPECT_THROW(read_complex_matrix(dir / "psi.bin", hash + 1), std::runtime_error);

  write_matrix(dir / "psi32.bin", dict.matrix, hash, "x", true);
  EXPECT_LE((read_complex_matrix(dir / "psi32.bin", hash) - dict.matrix).cwiseAbs().maxCoeff(), 1e-6);

  const RealMatrix R = RealMatrix::Random(7, 3);
  write_matrix(dir / "r.bin", R, 42, "phi");
  EXPECT_EQ(read_real_matrix(dir / "r.bin", 42), R);
  EXPECT_THROW(read_complex_matrix(dir / "r.bin", 42), std::runtime_error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace bcsr
