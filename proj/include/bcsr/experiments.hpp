#pragma once

// Monte-Carlo harness: method x sweep grids, success scoring, CSV output and
// timing benchmarks.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "bcsr/power.hpp"
#include "bcsr/recovery.hpp"

namespace bcsr {

enum class RecoveryAlgorithm { bmp, bomp };

/// One of BMP, BOMP, BMP-E, BOMP-E, BMP-M, BOMP-M, BMP-EM, BOMP-EM.
struct Method {
  RecoveryAlgorithm algorithm = RecoveryAlgorithm::bomp;
  bool allocated = false;  ///< "E": energy allocated against phi
  bool designed = false;   ///< "M": designed measurement matrix

  std::string name() const;
  bool operator==(const Method&) const = default;
};

/// Throws std::invalid_argument for an unknown name.
Method parse_method(std::string_view name);
std::vector<Method> parse_methods(std::string_view comma_separated);

enum class SweepAxis { percent, enr };
enum class SuccessMode { on_grid, off_grid };
enum class AllocEngine { qp, direct, uniform };

std::string_view to_string(SweepAxis axis);
std::string_view to_string(AllocEngine engine);

struct ExperimentConfig {
  Scenario scenario;
  std::vector<Method> methods;
  SweepAxis axis = SweepAxis::percent;
  std::vector<double> values;
  double fixed_percent = 60.0;  ///< used when sweeping ENR
  /// Used when sweeping percent; defaults to the scenario's ENR.
  std::optional<double> fixed_enr_db;
  int trials = 200;
  std::uint64_t seed = 1;
  SuccessMode success = SuccessMode::on_grid;
  /// Engine used by the "E" methods.
  AllocEngine alloc = AllocEngine::direct;
  double p_min = 0.1;
  /// Defaults to default_floor_frac(Mt, p_min).
  std::optional<double> floor_frac;
  unsigned threads = 0;  ///< 0 means hardware concurrency
  bool timing = false;   ///< report runtimes in the CSV

  void validate() const;
};

/// round(percent/100 * Mt*Nr*Ns*Np), clamped to [1, total].
Index measurement_count(double percent, const WaveformParams& wf, const RadarGeometry& geo);

/// Selected block set equals the target set (on-grid) or the set of nearest
/// grid blocks (off-grid). Order is ignored.
bool score_success(const RecoverySolution& solution, const Scenario& scenario, SuccessMode mode);

/// Blocks a correct estimate must select.
std::vector<Index> expected_blocks(const Scenario& scenario, SuccessMode mode);

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};
WilsonInterval wilson_interval(int successes, int trials, double z = 1.959963984540054);

/// Independent stream for one trial. Depends only on the base seed, the sweep
/// value, the trial index and the stream id, so every method sees the same
/// attenuations, noise and Gaussian phi for a given trial.
std::mt19937_64 trial_stream(std::uint64_t base_seed, double axis_value, Index trial,
                             std::uint32_t stream);

inline constexpr std::uint32_t kStreamBeta = 1;
inline constexpr std::uint32_t kStreamNoise = 2;
inline constexpr std::uint32_t kStreamPhi = 3;

struct TrialRecord {
  Method method;
  double axis_value = 0.0;
  Index trial = 0;
  bool success = false;
  double runtime_ms = 0.0;  ///< recovery stage only
  std::vector<Index> selected;
  RealVector powers;
  /// Normalized allocation costs on this trial's coupling matrix ("E" only).
  double cost_uniform = 0.0;
  double cost_allocated = 0.0;
  ComplexVector y;  ///< compressed measurement, kept only when requested
};

struct CurveRow {
  std::string method;
  std::string axis_name;
  double axis_value = 0.0;
  int trials = 0;
  int successes = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_runtime_ms = 0.0;
};

struct PreprocessTimes {
  double design_ms = 0.0;      ///< design LP plus eigen-factorization
  double allocation_ms = 0.0;  ///< coupling matrix plus allocation, per call
};

struct SweepResult {
  std::vector<CurveRow> rows;
  std::vector<TrialRecord> records;  ///< ordered by (method, value, trial)
  PreprocessTimes preprocess;
};

/// Precomputed, immutable state shared by all trials of a sweep: the unit
/// dictionary, the design LP solution and the designed phi (plus its
/// allocation) for every M the sweep visits.
class ExperimentContext {
 public:
  explicit ExperimentContext(const ExperimentConfig& config);

  const ExperimentConfig& config() const { return config_; }
  const BlockDictionary& unit_dictionary() const { return unit_dict_; }
  const std::vector<Index>& expected() const { return expected_; }
  const std::optional<DesignResult>& design() const { return design_; }

  /// Throws std::out_of_range if M was not precomputed.
  const MeasurementMatrix& designed_phi(Index M) const;
  const AllocationResult& designed_allocation(Index M) const;

  AllocationResult allocate(const CouplingMatrix& coupling) const;

  /// Measurement count and ENR at one sweep value.
  Index M_at(double axis_value) const;
  double enr_at(double axis_value) const;

  /// One trial. `keep_y` stores the compressed measurement in the record;
  /// `repeats` reruns the recovery stage to average its runtime.
  TrialRecord run_trial(const Method& method, double axis_value, Index trial,
                        bool keep_y = false, int repeats = 1) const;

  PreprocessTimes preprocess_times() const { return times_; }

 private:
  ExperimentConfig config_;
  BlockDictionary unit_dict_;
  std::vector<Index> expected_;
  std::optional<DesignResult> design_;
  std::vector<std::pair<Index, ExtractedPhi>> designed_;
  std::vector<std::pair<Index, AllocationResult>> designed_alloc_;
  PreprocessTimes times_;
};

/// Runs every (method, value, trial) and aggregates. Trials run on a thread
/// pool; results are reduced in a fixed order so the output does not depend
/// on the thread count.
SweepResult sweep(const ExperimentConfig& config);

void write_csv(const SweepResult& result, std::ostream& out, bool with_runtime);
void write_csv(const SweepResult& result, const std::filesystem::path& path, bool with_runtime);

/// gnuplot data: one indexed block per method with columns
/// axis_value rate ci_low ci_high, plus a companion .gp script.
void write_plot(const SweepResult& result, const std::filesystem::path& path);

struct BenchRow {
  std::string method;
  double mean_ms = 0.0;
  double normalized = 0.0;  ///< mean_ms / BMP mean_ms
};

struct BenchResult {
  std::vector<BenchRow> rows;
  PreprocessTimes preprocess;
};

/// Per-trial recovery time at one operating point (the first sweep value),
/// normalized by BMP. Each trial's recovery is repeated `repeats` times.
BenchResult bench(const ExperimentConfig& config, int repeats = 20);

}  // namespace bcsr
