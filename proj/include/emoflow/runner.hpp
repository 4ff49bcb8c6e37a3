#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "emoflow/config.hpp"
#include "emoflow/diagnostics.hpp"
#include "emoflow/dynamics.hpp"
#include "emoflow/io.hpp"

namespace emoflow {

struct RunResult {
  Algorithm algorithm;
  bool converged = false;
  long steps = 0;
  double wall_seconds = 0.0;
  KktReport kkt{0, 0, 0, {}};
  std::optional<double> oracle_gap;  // ||x(T) - x*||_inf when a fixture exists
  std::string csv_path;
  std::string summary_path;
};

/// Directory searched for oracle fixtures: $EMOFLOW_FIXTURES if set,
/// otherwise the compiled-in default (the repo's data/fixtures).
inline std::string fixture_dir() {
  if (const char* env = std::getenv("EMOFLOW_FIXTURES")) return env;
#ifdef EMOFLOW_DEFAULT_FIXTURE_DIR
  return EMOFLOW_DEFAULT_FIXTURE_DIR;
#else
  return "data/fixtures";
#endif
}

inline std::optional<Fixture> find_fixture(const EmoProblem& problem) {
  namespace fs = std::filesystem;
  const std::string hash = problem_hash_hex(problem);
  const fs::path dir = fixture_dir();
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return std::nullopt;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.path().extension() != ".fix") continue;
    try {
      Fixture f = read_fixture(entry.path().string());
      if (f.problem_hash == hash && f.x_star.size() == problem.total_dim()) return f;
    } catch (const std::exception&) {
      continue;
    }
  }
  return std::nullopt;
}

inline RunResult run_single(const EmoSystem& system, Algorithm alg,
                            const ExperimentConfig& cfg) {
  IntegrateOptions opts;
  opts.h = cfg.h;
  opts.t_end = cfg.t_end;
  opts.tol = cfg.tol;
  opts.sample_stride = cfg.sample_stride;

  SolverState init = system.default_init(alg);
  if (cfg.init_primal) {
    require(cfg.init_primal->size() == init.primal.size(), "init_primal length mismatch");
    init.primal = *cfg.init_primal;
  }
  if (cfg.init_lambda) {
    require(cfg.init_lambda->size() == init.lambda.size(), "init_lambda length mismatch");
    init.lambda = *cfg.init_lambda;
  }
  if (cfg.init_z) {
    require(cfg.init_z->size() == init.z.size(), "init_z length mismatch");
    init.z = *cfg.init_z;
  }

  const auto t0 = std::chrono::steady_clock::now();
  Trajectory traj = integrate(system, alg, std::move(init), opts);
  const auto t1 = std::chrono::steady_clock::now();

  const Vector x_final = traj.samples.back().x;
  RunResult res;
  res.algorithm = alg;
  res.converged = traj.converged;
  res.steps = traj.steps;
  res.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  res.kkt = kkt_residual(system.problem(), system.stacked(), system.graph(), x_final,
                         traj.final_state.lambda);
  if (const auto fixture = find_fixture(system.problem()))
    res.oracle_gap = (x_final - fixture->x_star).lpNorm<Eigen::Infinity>();

  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_path);
  const std::string base =
      (fs::path(cfg.output_path) / (cfg.name + "_" + algorithm_name(alg))).string();
  res.csv_path = base + ".csv";
  write_trajectory_csv(res.csv_path, traj);

  nlohmann::json summary = {
      {"experiment", cfg.name},
      {"algorithm", algorithm_name(alg)},
      {"converged", res.converged},
      {"steps", res.steps},
      {"h", traj.step},
      {"h_final", traj.step_final},
      {"chatter_halvings", traj.chatter_halvings},
      {"t_final", traj.final_state.t},
      {"wall_seconds", res.wall_seconds},
      {"f_final", traj.samples.back().f_value},
      {"kkt", {{"stationarity", res.kkt.stationarity},
               {"feasibility", res.kkt.feasibility},
               {"consensus", res.kkt.consensus}}},
      {"max_set_violation", traj.max_set_violation},
      {"max_z_drift", traj.max_z_drift},
  };
  if (res.oracle_gap) summary["oracle_gap"] = *res.oracle_gap;

  res.summary_path = base + "_summary.json";
  {
    std::ofstream out(res.summary_path);
    out << summary.dump(2) << "\n";
  }
  {
    std::ofstream out(base + "_summary.txt");
    out << "experiment:     " << cfg.name << "\n"
        << "algorithm:      " << algorithm_name(alg) << "\n"
        << "converged:      " << (res.converged ? "yes" : "no") << "\n"
        << "steps:          " << res.steps << "\n"
        << "wall seconds:   " << format_double(res.wall_seconds) << "\n"
        << "stationarity:   " << format_double(res.kkt.stationarity) << "\n"
        << "feasibility:    " << format_double(res.kkt.feasibility) << "\n"
        << "consensus:      " << format_double(res.kkt.consensus) << "\n";
    if (res.oracle_gap) out << "oracle gap:     " << format_double(*res.oracle_gap) << "\n";
  }
  return res;
}

/// Runs the configured experiment; with algorithm = both the two
/// simulations run concurrently. Returns one result per algorithm.
inline std::vector<RunResult> run_experiment(const ExperimentConfig& cfg) {
  BuiltinInstance instance = build_instance(cfg);
  const ValidationReport report = validate(instance.problem, instance.graph);
  require(report.ok(), [&] {
    std::string msg = "validation failed:";
    for (const auto& c : report.checks)
      if (!c.pass) msg += " [" + c.name + "] " + c.detail;
    return msg;
  }());
  EmoSystem system(std::move(instance.problem), std::move(instance.graph));

  std::vector<RunResult> results;
  if (cfg.algorithm == AlgorithmChoice::Both) {
    auto dpofa = std::async(std::launch::async,
                            [&] { return run_single(system, Algorithm::Dpofa, cfg); });
    auto ddfa = std::async(std::launch::async,
                           [&] { return run_single(system, Algorithm::Ddfa, cfg); });
    results.push_back(dpofa.get());
    results.push_back(ddfa.get());
  } else {
    const Algorithm alg =
        cfg.algorithm == AlgorithmChoice::Dpofa ? Algorithm::Dpofa : Algorithm::Ddfa;
    results.push_back(run_single(system, alg, cfg));
  }
  return results;
}

}  // namespace emoflow
