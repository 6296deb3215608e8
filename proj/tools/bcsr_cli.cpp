// bcsr: command-line front end for the block-CS MIMO radar toolkit.

#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bcsr/experiments.hpp"
#include "bcsr/matrix_io.hpp"
#include "bcsr/scenario_io.hpp"

using namespace bcsr;
using nlohmann::json;

namespace {

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

struct CommonOptions {
  std::string scenario;
  std::uint64_t seed = 1;
  std::string methods;
  std::string alloc = "direct";
  std::string success = "on_grid";
  double percent = 60.0;
  double enr = std::numeric_limits<double>::quiet_NaN();
  int trials = 200;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_trials) {
  cmd->add_option("--scenario", o.scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--methods", o.methods, "comma-separated methods (BMP, BOMP, BMP-E, ..., BOMP-EM)");
  cmd->add_option("--alloc", o.alloc, "allocation engine for -E methods")
      ->check(CLI::IsMember({"qp", "direct", "uniform"}));
  cmd->add_option("--success", o.success, "success rule")->check(CLI::IsMember({"on_grid", "off_grid"}));
  cmd->add_option("--percent", o.percent, "measurement percentage (fixed axis)");
  cmd->add_option("--enr", o.enr, "ENR in dB (fixed axis; defaults to the scenario's)");
  if (with_trials) {
    cmd->add_option("--trials", o.trials, "trials per point");
    cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  }
}

AllocEngine engine_from(const std::string& s) {
  if (s == "qp") return AllocEngine::qp;
  if (s == "uniform") return AllocEngine::uniform;
  return AllocEngine::direct;
}

ExperimentConfig make_config(const CommonOptions& o, const std::string& default_methods) {
  ExperimentConfig cfg;
  cfg.scenario = load_scenario(o.scenario);
  cfg.methods = parse_methods(o.methods.empty() ? default_methods : o.methods);
  cfg.seed = o.seed;
  cfg.alloc = engine_from(o.alloc);
  cfg.success = o.success == "off_grid" ? SuccessMode::off_grid : SuccessMode::on_grid;
  cfg.trials = o.trials;
  cfg.threads = o.threads;
  cfg.fixed_percent = o.percent;
  if (!std::isnan(o.enr)) cfg.fixed_enr_db = o.enr;
  cfg.axis = SweepAxis::percent;
  cfg.values = {o.percent};
  return cfg;
}

std::string join(const std::vector<Index>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

int run_simulate(const CommonOptions& o, Index trial) {
  ExperimentConfig cfg = make_config(o, "BMP,BOMP");
  cfg.trials = 1;
  const ExperimentContext ctx(cfg);
  std::printf("scenario: L=%ld d=%ld rows=%ld K=%ld M=%ld ENR=%.3g dB\n",
              static_cast<long>(cfg.scenario.L()), static_cast<long>(cfg.scenario.d()),
              static_cast<long>(cfg.scenario.rows()), static_cast<long>(cfg.scenario.K()),
              static_cast<long>(ctx.M_at(o.percent)), ctx.enr_at(o.percent));
  std::printf("expected blocks: %s\n", join(ctx.expected()).c_str());
  for (const auto& m : cfg.methods) {
    const auto rec = ctx.run_trial(m, o.percent, trial, true);
    std::printf("%-8s selected=%-12s success=%d runtime=%.3f ms ||y||=%.4g powers=[", m.name().c_str(),
                join(rec.selected).c_str(), rec.success ? 1 : 0, rec.runtime_ms, rec.y.norm());
    for (Index i = 0; i < rec.powers.size(); ++i) std::printf(i ? ", %.6f" : "%.6f", rec.powers(i));
    std::printf("]\n");
  }
  return 0;
}

int run_sweep(const CommonOptions& o, const std::string& axis, const std::string& values,
              const std::string& out, const std::string& plot, bool timing) {
  ExperimentConfig cfg = make_config(o, "BMP,BOMP,BMP-E,BOMP-E,BMP-M,BOMP-M");
  cfg.axis = axis == "enr" ? SweepAxis::enr : SweepAxis::percent;
  cfg.values = parse_values(values);
  cfg.timing = timing;
  const SweepResult res = sweep(cfg);
  if (out.empty() || out == "-")
    write_csv(res, std::cout, timing);
  else
    write_csv(res, out, timing);
  if (!plot.empty()) write_plot(res, plot);
  return 0;
}

int run_design(const CommonOptions& o, const std::string& out) {
  const Scenario sc = load_scenario(o.scenario);
  const auto dict = unit_power_basis(sc);
  const Index M = measurement_count(o.percent, sc.waveform, sc.geometry);
  const auto problem = build_design_problem(dict);
  const auto design = design_F(problem);
  const auto ex = extract_phi(design.F, M);
  const auto hash = scenario_hash(sc);
  write_matrix(out, ex.phi.matrix, hash, "phi:rows=M,cols=time-major");

  json side;
  side["M"] = M;
  side["objective"] = design.objective;
  side["identity_objective"] = design_objective(
      problem, RealMatrix::Identity(sc.rows(), sc.rows()) / static_cast<double>(sc.waveform.Np * sc.waveform.Ns));
  side["max_constraint_violation"] = design.max_constraint_violation;
  side["eigenvalues"] = std::vector<double>(ex.eigenvalues.data(), ex.eigenvalues.data() + ex.eigenvalues.size());
  side["zero_padded_rows"] = ex.phi.zero_padded_rows;
  side["clipped_mass"] = ex.clipped_mass;
  side["solver"] = {{"status", std::string(numerics::to_string(design.report.status))},
                    {"iterations", design.report.iterations},
                    {"primal_residual", design.report.primal_residual},
                    {"dual_residual", design.report.dual_residual},
                    {"gap", design.report.gap},
                    {"constraint_rank", design.report.rank}};
  side["scenario_hash"] = hash;
  std::ofstream(out + ".json") << side.dump(2) << '\n';
  std::printf("wrote %s (%ld x %ld), objective %.6g\n", out.c_str(), static_cast<long>(M),
              static_cast<long>(sc.rows()), design.objective);
  return 0;
}

int run_allocate(const CommonOptions& o, const std::string& phi_path, const std::string& out) {
  ExperimentConfig cfg = make_config(o, "BOMP-E");
  const Scenario& sc = cfg.scenario;
  MeasurementMatrix phi;
  if (!phi_path.empty()) {
    phi.matrix = read_real_matrix(phi_path, scenario_hash(sc));
    phi.kind = PhiKind::designed;
  } else {
    std::mt19937_64 rng(o.seed);
    phi = sample_gaussian_phi(measurement_count(o.percent, sc.waveform, sc.geometry), sc.rows(), rng);
  }
  const ExperimentContext ctx(cfg);
  const auto coupling = build_coupling(ctx.unit_dictionary(), phi);
  const auto res = ctx.allocate(coupling);
  json j;
  j["p"] = std::vector<double>(res.allocation.p.data(), res.allocation.p.data() + res.allocation.p.size());
  j["Pt"] = res.allocation.Pt;
  j["cost_before"] = res.cost_before;
  j["cost_after"] = res.cost_after;
  j["method"] = res.method;
  if (out.empty() || out == "-")
    std::cout << j.dump(2) << '\n';
  else
    std::ofstream(out) << j.dump(2) << '\n';
  return 0;
}

int run_bench(const CommonOptions& o, int repeats) {
  ExperimentConfig cfg = make_config(o, "BMP,BOMP,BMP-E,BOMP-E,BMP-M,BOMP-M");
  const BenchResult res = bench(cfg, repeats);
  std::printf("method,mean_ms,normalized\n");
  for (const auto& r : res.rows) std::printf("%s,%.5f,%.4f\n", r.method.c_str(), r.mean_ms, r.normalized);
  std::printf("# preprocessing: design %.2f ms, allocation %.3f ms\n", res.preprocess.design_ms,
              res.preprocess.allocation_ms);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block compressive sensing for distributed MIMO radar"};
  app.require_subcommand(1);

  CommonOptions sim_o, sweep_o, design_o, alloc_o, bench_o;

  auto* sim = app.add_subcommand("simulate", "run one trial and print the details");
  add_common(sim, sim_o, false);
  Index sim_trial = 0;
  sim->add_option("--trial", sim_trial, "trial index");

  auto* sw = app.add_subcommand("sweep", "Monte-Carlo success-rate sweep");
  add_common(sw, sweep_o, true);
  std::string axis = "percent", values, out, plot;
  bool timing = false;
  sw->add_option("--sweep", axis, "swept axis")->check(CLI::IsMember({"percent", "enr"}));
  sw->add_option("--values", values, "comma-separated sweep values")->required();
  sw->add_option("--out", out, "CSV output (default stdout)");
  sw->add_option("--plot", plot, "gnuplot data file (a .gp script is written next to it)");
  sw->add_flag("--timing", timing, "fill mean_runtime_ms (otherwise NA, keeping output reproducible)");

  auto* des = app.add_subcommand("design-phi", "design the measurement matrix");
  add_common(des, design_o, false);
  std::string design_out;
  des->add_option("--out", design_out, "binary matrix file; a .json sidecar is written next to it")->required();

  auto* al = app.add_subcommand("allocate-power", "allocate transmit energy for a phi");
  add_common(al, alloc_o, false);
  std::string phi_path, alloc_out;
  al->add_option("--phi", phi_path, "phi matrix file (default: Gaussian draw from --seed)");
  al->add_option("--out", alloc_out, "allocation JSON (default stdout)");

  auto* be = app.add_subcommand("bench", "normalized per-trial processing time");
  add_common(be, bench_o, true);
  bench_o.trials = 50;
  int repeats = 20;
  be->add_option("--repeats", repeats, "recovery repetitions per trial");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return run_simulate(sim_o, sim_trial);
    if (*sw) return run_sweep(sweep_o, axis, values, out, plot, timing);
    if (*des) return run_design(design_o, design_out);
    if (*al) return run_allocate(alloc_o, phi_path, alloc_out);
    if (*be) return run_bench(bench_o, repeats);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
