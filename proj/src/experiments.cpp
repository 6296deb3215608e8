#include "bcsr/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace bcsr {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

// Psi = Psibar * H1: scale column (h, l, i) by q(i).
ComplexMatrix scaled_dictionary(const BlockDictionary& unit, const RealVector& q) {
  ComplexMatrix psi = unit.matrix;
  for (Index c = 0; c < psi.cols(); ++c) psi.col(c) *= q(c % unit.Mt);
  return psi;
}

}  // namespace

std::string Method::name() const {
  std::string out = algorithm == RecoveryAlgorithm::bmp ? "BMP" : "BOMP";
  if (allocated || designed) out += '-';
  if (allocated) out += 'E';
  if (designed) out += 'M';
  return out;
}

Method parse_method(std::string_view name) {
  for (auto alg : {RecoveryAlgorithm::bmp, RecoveryAlgorithm::bomp})
    for (bool e : {false, true})
      for (bool m : {false, true}) {
        const Method candidate{alg, e, m};
        if (candidate.name() == name) return candidate;
      }
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::vector<Method> parse_methods(std::string_view list) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t end = std::min(list.find(',', start), list.size());
    auto item = list.substr(start, end - start);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) item.remove_prefix(1);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) item.remove_suffix(1);
    if (!item.empty()) out.push_back(parse_method(item));
    start = end + 1;
  }
  return out;
}

std::string_view to_string(SweepAxis axis) {
  return axis == SweepAxis::percent ? "measurement_percent" : "enr_db";
}

std::string_view to_string(AllocEngine engine) {
  switch (engine) {
    case AllocEngine::qp: return "qp";
    case AllocEngine::direct: return "direct";
    case AllocEngine::uniform: return "uniform";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("config: trials must be at least 1");
  if (methods.empty()) throw std::invalid_argument("config: method list is empty");
  if (values.empty()) throw std::invalid_argument("config: sweep values are empty");
  auto bad_percent = [](double p) { return !(p > 0.0 && p <= 100.0); };
  if (axis == SweepAxis::percent && std::any_of(values.begin(), values.end(), bad_percent))
    throw std::invalid_argument("config: percent values must lie in (0, 100]");
  if (axis == SweepAxis::enr && bad_percent(fixed_percent))
    throw std::invalid_argument("config: fixed percent must lie in (0, 100]");
  scenario.validate();
}

Index measurement_count(double percent, const WaveformParams& wf, const RadarGeometry& geo) {
  const Index total = geo.Mt() * geo.Nr() * wf.Ns * wf.Np;
  const auto M = static_cast<Index>(std::llround(percent / 100.0 * static_cast<double>(total)));
  return std::clamp<Index>(M, 1, total);
}

std::vector<Index> expected_blocks(const Scenario& scenario, SuccessMode mode) {
  std::vector<Index> out;
  for (const auto& t : scenario.targets) {
    if (mode == SuccessMode::on_grid) {
      const auto h = find_grid_point(scenario.grid, t.position, t.velocity);
      if (!h) throw std::invalid_argument("target not on grid");
      out.push_back(*h);
    } else {
      out.push_back(nearest_grid_block(scenario.grid, t));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool score_success(const RecoverySolution& solution, const Scenario& scenario, SuccessMode mode) {
  const auto expected = expected_blocks(scenario, mode);
  const std::set<Index> want(expected.begin(), expected.end());
  const std::set<Index> got(solution.selected_blocks.begin(), solution.selected_blocks.end());
  return want == got;
}

WilsonInterval wilson_interval(int successes, int trials, double z) {
  if (trials <= 0) return {};
  const double n = trials;
  const double p = successes / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::mt19937_64 trial_stream(std::uint64_t base_seed, double axis_value, Index trial,
                             std::uint32_t stream) {
  const auto bits = std::bit_cast<std::uint64_t>(axis_value);
  const auto t = static_cast<std::uint64_t>(trial);
  std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                    static_cast<std::uint32_t>(bits), static_cast<std::uint32_t>(bits >> 32),
                    static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32), stream};
  return std::mt19937_64(seq);
}

ExperimentContext::ExperimentContext(const ExperimentConfig& config) : config_(config) {
  config_.validate();
  unit_dict_ = unit_power_basis(config_.scenario);
  expected_ = expected_blocks(config_.scenario, config_.success);

  std::vector<Index> Ms;
  if (config_.axis == SweepAxis::percent) {
    for (double v : config_.values) Ms.push_back(M_at(v));
  } else {
    Ms.push_back(M_at(config_.values.front()));
  }
  std::sort(Ms.begin(), Ms.end());
  Ms.erase(std::unique(Ms.begin(), Ms.end()), Ms.end());

  const bool any_designed = std::any_of(config_.methods.begin(), config_.methods.end(),
                                        [](const Method& m) { return m.designed; });
  const bool any_allocated = std::any_of(config_.methods.begin(), config_.methods.end(),
                                         [](const Method& m) { return m.allocated; });

  if (any_designed) {
    const auto start = Clock::now();
    design_ = design_F(build_design_problem(unit_dict_));
    for (Index M : Ms) designed_.emplace_back(M, extract_phi(design_->F, M));
    times_.design_ms = ms_since(start);
    for (const auto& [M, ex] : designed_)
      designed_alloc_.emplace_back(M, allocate(build_coupling(unit_dict_, ex.phi)));
  }
  if (any_allocated) {
    // Cost of one allocation against a Gaussian phi at the first M.
    std::mt19937_64 rng(config_.seed);
    const auto phi = sample_gaussian_phi(Ms.front(), config_.scenario.rows(), rng);
    constexpr int reps = 5;
    const auto start = Clock::now();
    for (int r = 0; r < reps; ++r) allocate(build_coupling(unit_dict_, phi));
    times_.allocation_ms = ms_since(start) / reps;
  }
}

Index ExperimentContext::M_at(double axis_value) const {
  const double percent = config_.axis == SweepAxis::percent ? axis_value : config_.fixed_percent;
  return measurement_count(percent, config_.scenario.waveform, config_.scenario.geometry);
}

double ExperimentContext::enr_at(double axis_value) const {
  if (config_.axis == SweepAxis::enr) return axis_value;
  return config_.fixed_enr_db.value_or(config_.scenario.enr_db);
}

const MeasurementMatrix& ExperimentContext::designed_phi(Index M) const {
  for (const auto& [m, ex] : designed_)
    if (m == M) return ex.phi;
  throw std::out_of_range("no designed phi for M = " + std::to_string(M));
}

const AllocationResult& ExperimentContext::designed_allocation(Index M) const {
  for (const auto& [m, a] : designed_alloc_)
    if (m == M) return a;
  throw std::out_of_range("no designed allocation for M = " + std::to_string(M));
}

AllocationResult ExperimentContext::allocate(const CouplingMatrix& coupling) const {
  const double Pt = config_.scenario.powers.Pt;
  switch (config_.alloc) {
    case AllocEngine::qp: return allocate_qp(coupling, config_.p_min, Pt);
    case AllocEngine::direct:
      return allocate_direct(coupling, Pt,
                             config_.floor_frac.value_or(default_floor_frac(coupling.Mt, config_.p_min)));
    case AllocEngine::uniform: return allocate_uniform(coupling, Pt);
  }
  throw std::logic_error("unknown allocation engine");
}

TrialRecord ExperimentContext::run_trial(const Method& method, double axis_value, Index trial,
                                         bool keep_y, int repeats) const {
  const Scenario& base = config_.scenario;
  const Index M = M_at(axis_value);
  TrialRecord rec;
  rec.method = method;
  rec.axis_value = axis_value;
  rec.trial = trial;

  auto beta_rng = trial_stream(config_.seed, axis_value, trial, kStreamBeta);
  const Scenario scene = draw_attenuations(base, beta_rng);

  MeasurementMatrix phi;
  if (method.designed) {
    phi = designed_phi(M);
  } else {
    auto phi_rng = trial_stream(config_.seed, axis_value, trial, kStreamPhi);
    phi = sample_gaussian_phi(M, base.rows(), phi_rng);
  }

  rec.powers = base.powers.p;
  if (method.allocated) {
    const AllocationResult alloc =
        method.designed ? designed_allocation(M) : allocate(build_coupling(unit_dict_, phi));
    rec.powers = alloc.allocation.p;
    rec.cost_uniform = alloc.cost_before;
    rec.cost_allocated = alloc.cost_after;
  }
  const ComplexMatrix psi = scaled_dictionary(unit_dict_, rec.powers);

  ComplexVector z;
  if (config_.success == SuccessMode::on_grid) {
    const BlockSparseVector s = ground_truth_vector(scene);
    z = ComplexVector::Zero(psi.rows());
    for (Index l : s.support()) z.noalias() += psi.middleCols(l * s.block_len, s.block_len) * s.block(l);
  } else {
    z = target_returns(scene, rec.powers);
  }
  auto noise_rng = trial_stream(config_.seed, axis_value, trial, kStreamNoise);
  z += complex_noise(z.size(), noise_variance(enr_at(axis_value), base.Nr()), noise_rng);

  const ComplexVector y = compress(phi, z);
  const SensingMatrix theta = sensing_matrix(phi, psi, base.d(), true);
  const int K = static_cast<int>(base.K());

  RecoverySolution sol;
  const auto start = Clock::now();
  for (int r = 0; r < std::max(repeats, 1); ++r)
    sol = method.algorithm == RecoveryAlgorithm::bmp ? bmp(theta, y, K) : bomp(theta, y, K);
  rec.runtime_ms = ms_since(start) / std::max(repeats, 1);

  rec.selected = sol.selected_blocks;
  rec.success = score_success(sol, scene, config_.success);
  if (keep_y) rec.y = y;
  return rec;
}

SweepResult sweep(const ExperimentConfig& config) {
  const ExperimentContext ctx(config);
  const std::size_t n_methods = config.methods.size();
  const std::size_t n_values = config.values.size();
  const auto n_trials = static_cast<std::size_t>(config.trials);
  const std::size_t total = n_methods * n_values * n_trials;

  std::vector<TrialRecord> records(total);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t error_index = total;
  std::string error_text;

  auto worker = [&] {
    for (std::size_t i = next++; i < total && !failed; i = next++) {
      const std::size_t mi = i / (n_values * n_trials);
      const std::size_t vi = (i / n_trials) % n_values;
      const std::size_t ti = i % n_trials;
      try {
        records[i] = ctx.run_trial(config.methods[mi], config.values[vi], static_cast<Index>(ti));
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          std::ostringstream msg;
          msg << "trial failed (method " << config.methods[mi].name() << ", value "
              << config.values[vi] << ", trial " << ti << "): " << e.what();
          error_text = msg.str();
        }
        failed = true;
      }
    }
  };

  unsigned n_threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(total)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed) throw std::runtime_error(error_text);

  SweepResult result;
  result.preprocess = ctx.preprocess_times();
  for (std::size_t mi = 0; mi < n_methods; ++mi)
    for (std::size_t vi = 0; vi < n_values; ++vi) {
      CurveRow row;
      row.method = config.methods[mi].name();
      row.axis_name = std::string(to_string(config.axis));
      row.axis_value = config.values[vi];
      row.trials = config.trials;
      double runtime = 0.0;
      for (std::size_t ti = 0; ti < n_trials; ++ti) {
        const auto& rec = records[(mi * n_values + vi) * n_trials + ti];
        row.successes += rec.success ? 1 : 0;
        runtime += rec.runtime_ms;
      }
      row.rate = static_cast<double>(row.successes) / row.trials;
      const auto ci = wilson_interval(row.successes, row.trials);
      row.ci_low = ci.low;
      row.ci_high = ci.high;
      row.mean_runtime_ms = runtime / row.trials;
      result.rows.push_back(row);
    }
  result.records = std::move(records);
  return result;
}

void write_csv(const SweepResult& result, std::ostream& out, bool with_runtime) {
  out << "method,axis_name,axis_value,trials,successes,rate,ci_low,ci_high,mean_runtime_ms\n";
  for (const auto& r : result.rows) {
    out << r.method << ',' << r.axis_name << ',' << format_double("%.10g", r.axis_value) << ','
        << r.trials << ',' << r.successes << ',' << format_double("%.6f", r.rate) << ','
        << format_double("%.6f", r.ci_low) << ',' << format_double("%.6f", r.ci_high) << ','
        << (with_runtime ? format_double("%.4f", r.mean_runtime_ms) : std::string("NA")) << '\n';
  }
}

void write_csv(const SweepResult& result, const std::filesystem::path& path, bool with_runtime) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(result, out, with_runtime);
}

void write_plot(const SweepResult& result, const std::filesystem::path& path) {
  std::ofstream data(path, std::ios::binary);
  if (!data) throw std::runtime_error("cannot write " + path.string());
  std::vector<std::string> methods;
  for (const auto& r : result.rows)
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
  for (std::size_t k = 0; k < methods.size(); ++k) {
    if (k > 0) data << "\n\n";
    data << "# " << methods[k] << "\n# axis_value rate ci_low ci_high\n";
    for (const auto& r : result.rows)
      if (r.method == methods[k])
        data << format_double("%.10g", r.axis_value) << ' ' << format_double("%.6f", r.rate) << ' '
             << format_double("%.6f", r.ci_low) << ' ' << format_double("%.6f", r.ci_high) << '\n';
  }

  auto script_path = path;
  script_path += ".gp";
  std::ofstream gp(script_path);
  if (!gp) throw std::runtime_error("cannot write " + script_path.string());
  const std::string axis = result.rows.empty() ? "value" : result.rows.front().axis_name;
  gp << "set xlabel '" << axis << "'\nset ylabel 'success rate'\nset yrange [0:1]\n"
     << "set key bottom right\nplot ";
  for (std::size_t k = 0; k < methods.size(); ++k) {
    if (k > 0) gp << ", \\\n     ";
    gp << "'" << path.filename().string() << "' index " << k
       << " using 1:2:3:4 with yerrorlines title '" << methods[k] << "'";
  }
  gp << '\n';
}

BenchResult bench(const ExperimentConfig& config, int repeats) {
  const ExperimentContext ctx(config);
  const double v = config.values.front();
  BenchResult out;
  out.preprocess = ctx.preprocess_times();
  for (const auto& m : config.methods) {
    double total = 0.0;
    for (Index t = 0; t < config.trials; ++t) total += ctx.run_trial(m, v, t, false, repeats).runtime_ms;
    out.rows.push_back({m.name(), total / config.trials, 0.0});
  }
  const auto bmp_row = std::find_if(out.rows.begin(), out.rows.end(),
                                    [](const BenchRow& r) { return r.method == "BMP"; });
  const double ref = bmp_row != out.rows.end() ? bmp_row->mean_ms : out.rows.front().mean_ms;
  for (auto& r : out.rows) r.normalized = r.mean_ms / ref;
  return out;
}

}  // namespace bcsr
