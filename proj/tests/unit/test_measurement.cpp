#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bcsr/measurement.hpp"
#include "bcsr/scenario_io.hpp"
#include "oracles.hpp"

namespace bcsr {
namespace {

Scenario load(const char* name) {
  return load_scenario(std::string(BCSR_SOURCE_DIR "/scenarios/") + name);
}

// A small scenario whose design LP solves in milliseconds.
Scenario small_scenario() {
  Scenario s = load("reference_on_grid.json");
  s.waveform.Np = 1;
  s.waveform.Ns = 3;
  s.grid = {{80, 90}, {260}, {100, 110}, {100}};
  s.targets.clear();
  return s;
}

TEST(GaussianPhi, ShapeDeterminismAndMean) {
  std::mt19937_64 a(41), b(41);
  const auto phi = sample_gaussian_phi(96, 160, a);
  EXPECT_EQ(phi.M(), 96);
  EXPECT_EQ(phi.matrix.cols(), 160);
  EXPECT_DOUBLE_EQ(100.0 * 96 / 160, 60.0);
  EXPECT_EQ(phi.matrix, sample_gaussian_phi(96, 160, b).matrix);
  EXPECT_LE(std::abs(phi.matrix.mean()), 4.0 / std::sqrt(96.0 * 160.0));
  EXPECT_NEAR((phi.matrix.array().square()).mean(), 1.0, 0.05);
}

TEST(GaussianPhi, RejectsBadM) {
  std::mt19937_64 rng(1);
  EXPECT_THROW(sample_gaussian_phi(0, 10, rng), std::invalid_argument);
  EXPECT_THROW(sample_gaussian_phi(11, 10, rng), std::invalid_argument);
}

TEST(Compress, SelectorZeroAndLinearity) {
  std::mt19937_64 rng(42);
  MeasurementMatrix sel;
  sel.matrix = RealMatrix::Zero(2, 5);
  sel.matrix(0, 1) = 1.0;
  sel.matrix(1, 4) = 1.0;
  const ComplexVector z = oracle::random_complex(5, 1, rng);
  const ComplexVector y = compress(sel, z);
  EXPECT_EQ(y(0), z(1));
  EXPECT_EQ(y(1), z(4));
  EXPECT_EQ(compress(sel, ComplexVector::Zero(5)).norm(), 0.0);

  const auto phi = sample_gaussian_phi(30, 80, rng);
  for (int k = 0; k < 20; ++k) {
    const ComplexVector z1 = oracle::random_complex(80, 1, rng);
    const ComplexVector z2 = oracle::random_complex(80, 1, rng);
    const ComplexVector lhs = compress(phi, z1 + z2);
    EXPECT_LE((lhs - compress(phi, z1) - compress(phi, z2)).norm(), 1e-12 * lhs.norm());
  }
  EXPECT_THROW(compress(phi, ComplexVector::Zero(3)), std::invalid_argument);
}

TEST(SensingMatrix, IdentityAndNormalization) {
  const Scenario s = load("reference_on_grid.json");
  const auto dict = unit_power_basis(s);
  MeasurementMatrix eye;
  eye.matrix = RealMatrix::Identity(160, 160);
  const auto raw = sensing_matrix(eye, dict, false);
  EXPECT_EQ(raw.matrix, dict.matrix);

  std::mt19937_64 rng(43);
  const auto phi = sample_gaussian_phi(96, 160, rng);
  const auto theta = sensing_matrix(phi, dict, true);
  EXPECT_EQ(theta.matrix.rows(), 96);
  EXPECT_EQ(theta.matrix.cols(), 576);
  EXPECT_EQ(theta.blocks(), 144);
  for (Index c = 0; c < theta.matrix.cols(); ++c) EXPECT_NEAR(theta.matrix.col(c).norm(), 1.0, 1e-9);
  // Stored norms undo the normalization.
  const auto plain = sensing_matrix(phi, dict, false);
  EXPECT_LE((theta.matrix * theta.column_norms.cast<Complex>().asDiagonal() - plain.matrix).norm(),
            1e-10 * plain.matrix.norm());
}

TEST(SensingMatrix, DegenerateColumnThrows) {
  MeasurementMatrix phi;
  phi.matrix = RealMatrix::Zero(1, 2);
  phi.matrix(0, 0) = 1.0;
  ComplexMatrix psi = ComplexMatrix::Zero(2, 2);
  psi(0, 0) = 1.0;
  psi(1, 1) = 1.0;
  EXPECT_THROW(sensing_matrix(phi, psi, 1, true), std::invalid_argument);
  EXPECT_NO_THROW(sensing_matrix(phi, psi, 1, false));
}

TEST(SensingMatrix, CompressOfSynthesisIsThetaSPlusPhiE) {
  Scenario s = load("reference_on_grid.json");
  std::mt19937_64 rng(44);
  s = draw_attenuations(s, rng);
  const auto dict = unit_power_basis(s);
  const auto truth = ground_truth_vector(s);
  const auto phi = sample_gaussian_phi(80, 160, rng);
  const double var = 0.05;
  std::mt19937_64 noise_a(45), noise_b(45);
  const ComplexVector y = compress(phi, synthesize_received(dict, truth, var, noise_a));
  const ComplexVector e = complex_noise(160, var, noise_b);
  const auto theta = sensing_matrix(phi, dict, false);
  const ComplexVector expected = theta.matrix * truth.values + compress(phi, e);
  EXPECT_LE((y - expected).norm(), 1e-10 * expected.norm());
}

TEST(PackUpper, RoundTrip) {
  std::mt19937_64 rng(46);
  RealMatrix G = oracle::random_complex(6, 6, rng).real();
  const RealMatrix S = G + G.transpose();
  EXPECT_EQ(packed_size(6), 21);
  EXPECT_EQ(unpack_upper(pack_upper(S), 6), S);
}

// Cost of Eq. (66) straight from its definition: for every block and every
// ordered pair k != k', accumulate abs((psi_k psi_k'^H)^T).
RealMatrix cost_by_definition(const BlockDictionary& dict) {
  const Index n = dict.matrix.rows();
  RealMatrix G = RealMatrix::Zero(n, n);
  for (Index h = 0; h < dict.L; ++h)
    for (Index k = 0; k < dict.d; ++k)
      for (Index kp = 0; kp < dict.d; ++kp) {
        if (k == kp) continue;
        const ComplexVector a = dict.block(h).col(k);
        const ComplexVector b = dict.block(h).col(kp);
        G += (a * b.adjoint()).transpose().cwiseAbs();
      }
  return G;
}

TEST(DesignProblem, CostMatchesDefinitionAndIsNonnegative) {
  const Scenario s = small_scenario();
  const auto dict = unit_power_basis(s);
  const auto p = build_design_problem(dict);
  EXPECT_GE(p.g.minCoeff(), 0.0);
  EXPECT_GE(p.G.minCoeff(), 0.0);
  const RealMatrix G = cost_by_definition(dict);
  EXPECT_LE((p.G - G).norm(), 1e-10 * (1.0 + G.norm()));

  std::mt19937_64 rng(47);
  for (int k = 0; k < 10; ++k) {
    const RealMatrix R = oracle::random_complex(p.n_rows, p.n_rows, rng).real().cwiseAbs();
    const RealMatrix F = R + R.transpose();
    const double direct = (G.array() * F.array()).sum();
    EXPECT_NEAR(p.g.dot(pack_upper(F)), direct, 1e-9 * direct);
    EXPECT_NEAR(design_objective(p, F), direct, 1e-9 * direct);
  }
}

TEST(DesignProblem, ConstraintRowsMatchQuadraticForms) {
  const Scenario s = small_scenario();
  const auto dict = unit_power_basis(s);
  const auto p = build_design_problem(dict);
  EXPECT_EQ(p.A.rows(), dict.matrix.cols());
  EXPECT_EQ(p.A.cols(), packed_size(dict.matrix.rows()));
  std::mt19937_64 rng(48);
  for (int k = 0; k < 10; ++k) {
    const RealMatrix R = oracle::random_complex(p.n_rows, p.n_rows, rng).real();
    const RealMatrix F = R + R.transpose();
    // Oracle: psi^H F psi with complex arithmetic, real part.
    RealVector expected(dict.matrix.cols());
    for (Index i = 0; i < expected.size(); ++i) {
      const ComplexVector psi = dict.matrix.col(i);
      expected(i) = (psi.adjoint() * F.cast<Complex>() * psi)(0, 0).real();
    }
    EXPECT_LE((p.A * pack_upper(F) - expected).norm(), 1e-10 * expected.norm());
    EXPECT_LE((design_constraint_values(dict, F) - expected).norm(), 1e-10 * expected.norm());
  }
}

TEST(DesignProblem, SingleColumnHasZeroCost) {
  BlockDictionary dict;
  dict.matrix = ComplexMatrix::Ones(3, 1);
  dict.L = 1;
  dict.d = 1;
  dict.Mt = dict.Nr = dict.Ns = dict.Np = 1;
  const auto p = build_design_problem(dict);
  EXPECT_EQ(p.g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(DesignProblem, ScaledIdentityIsFeasible) {
  const Scenario s = load("reference_on_grid_np2.json");
  const auto dict = unit_power_basis(s);
  const auto p = build_design_problem(dict);
  const double NpNs = static_cast<double>(s.waveform.Np * s.waveform.Ns);
  const RealMatrix F = RealMatrix::Identity(80, 80) / NpNs;
  EXPECT_LE((p.A * pack_upper(F) - RealVector::Ones(576)).cwiseAbs().maxCoeff(), 1e-12);
  // 80 x 80 matrix variable; symmetry leaves 80*81/2 free entries.
  EXPECT_EQ(p.n_rows, 80);
  EXPECT_EQ(p.A.rows(), 576);
  EXPECT_EQ(p.A.cols(), 80 * 81 / 2);
}

void check_design(const Scenario& s) {
  const auto dict = unit_power_basis(s);
  const auto p = build_design_problem(dict);
  const auto res = design_F(p);
  const double NpNs = static_cast<double>(s.waveform.Np * s.waveform.Ns);
  const RealMatrix I = RealMatrix::Identity(p.n_rows, p.n_rows) / NpNs;
  const double identity_objective = design_objective(p, I);
  EXPECT_LE(res.objective, identity_objective + 1e-6 * (1.0 + std::abs(identity_objective)));
  EXPECT_GE(res.F.minCoeff(), -1e-9);
  EXPECT_EQ(res.F, res.F.transpose());
  EXPECT_LE((design_constraint_values(dict, res.F).array() - 1.0).abs().maxCoeff(), 1e-6);
  EXPECT_NEAR(res.objective, design_objective(p, res.F), 1e-9 * (1.0 + std::abs(res.objective)));
}

TEST(DesignF, SmallScenarioBeatsScaledIdentity) { check_design(small_scenario()); }

TEST(DesignF, ReferenceScenarioNp2) { check_design(load("reference_on_grid_np2.json")); }

TEST(DesignF, MatchesVertexEnumerationOnTinyProblem) {
  // 1 tx, 1 rx, 1 pulse, 3 samples, 2 grid points: 6 packed variables.
  Scenario s = small_scenario();
  s.geometry.tx.resize(1);
  s.geometry.rx.resize(1);
  s.powers = PowerAllocation::uniform(1, 1.0);
  s.grid = {{80, 90}, {260}, {100}, {100}};
  const auto dict = unit_power_basis(s);
  const auto p = build_design_problem(dict);
  const auto res = design_F(p);
  // Reduce to independent rows for the enumeration oracle.
  const auto rows = numerics::independent_rows(p.A, 1e-9);
  RealMatrix A(static_cast<Index>(rows.size()), p.A.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) A.row(static_cast<Index>(i)) = p.A.row(rows[i]);
  const auto best = oracle::lp_by_vertex_enumeration(p.g, A, RealVector::Ones(A.rows()));
  ASSERT_TRUE(best.has_value());
  EXPECT_NEAR(res.objective, *best, 1e-8);
}

TEST(ExtractPhi, IdentityAndDominantPair) {
  const auto ex = extract_phi(RealMatrix::Identity(5, 5), 5);
  EXPECT_LE((ex.phi.matrix.transpose() * ex.phi.matrix - RealMatrix::Identity(5, 5)).norm(), 1e-9);
  EXPECT_EQ(ex.phi.kind, PhiKind::designed);

  RealMatrix D = RealMatrix::Zero(3, 3);
  D.diagonal() << 4, 1, 0;
  const auto one = extract_phi(D, 1);
  ASSERT_EQ(one.phi.matrix.rows(), 1);
  EXPECT_NEAR(std::abs(one.phi.matrix(0, 0)), 2.0, 1e-12);
  EXPECT_NEAR(one.phi.matrix(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(one.phi.matrix(0, 2), 0.0, 1e-12);
}

TEST(ExtractPhi, ZeroPadsBeyondPositiveSpectrum) {
  RealMatrix D = RealMatrix::Zero(3, 3);
  D.diagonal() << 4, -1, 0;
  const auto ex = extract_phi(D, 3);
  EXPECT_EQ(ex.phi.zero_padded_rows, 2);
  EXPECT_DOUBLE_EQ(ex.clipped_mass, 1.0);
  EXPECT_EQ(ex.phi.matrix.row(2).norm(), 0.0);
}

TEST(ExtractPhi, ReproducesPsdMatrix) {
  std::mt19937_64 rng(49);
  for (int k = 0; k < 10; ++k) {
    const RealMatrix G = oracle::random_complex(12, 12, rng).real();
    const RealMatrix F = G * G.transpose();
    const auto ex = extract_phi(F, 12);
    EXPECT_LE((ex.phi.matrix.transpose() * ex.phi.matrix - F).norm(), 1e-8 * (1.0 + F.norm()));
  }
}

TEST(ExtractPhi, EckartYoungBoundOnDesignedF) {
  const Scenario s = load("reference_on_grid_np2.json");
  const auto dict = unit_power_basis(s);
  const auto res = design_F(build_design_problem(dict));
  for (Index M : {Index(28), Index(40), Index(48)}) {
    const auto ex = extract_phi(res.F, M);
    const RealVector& lam = ex.eigenvalues;
    const double tail = lam.tail(lam.size() - M).cwiseAbs().sum();
    const double err = (ex.phi.matrix.transpose() * ex.phi.matrix - res.F).norm();
    EXPECT_LE(err, tail + ex.clipped_mass + 1e-9);
  }
}

}  // namespace
}  // namespace bcsr
