#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "emoflow/builtins.hpp"
#include "emoflow/dynamics.hpp"
#include "emoflow/io.hpp"
#include "emoflow/types.hpp"

namespace emoflow {

enum class AlgorithmChoice { Dpofa, Ddfa, Both };

struct ExperimentConfig {
  std::string name = "experiment";
  std::optional<std::string> builtin;  // nonsmooth10 | netflow6x12 | minnorm
  AlgorithmChoice algorithm = AlgorithmChoice::Ddfa;
  double h = 1e-2;
  double t_end = 100.0;
  double tol = 1e-6;
  int sample_stride = 10;
  unsigned long long seed = 42;
  std::string output_path = ".";
  std::optional<Vector> init_primal;
  std::optional<Vector> init_lambda;
  std::optional<Vector> init_z;
  // Inline problem description (ignored when builtin is set).
  struct InlineAgent {
    int dim = 1;
    std::string objective;  // "quad_abs" | "sumsq" | "quadratic a... b..."
    std::string set;        // "free" | "interval lo hi" | "box lo... hi..." | "ball c... r"
    std::vector<double> w;  // m*dim row-major
  };
  int m = 0;
  std::vector<double> d0;
  std::vector<InlineAgent> agents;
  std::string graph_topology = "ring";
  std::vector<std::tuple<int, int, double>> graph_edges;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<double> parse_doubles(const std::string& s) {
  std::istringstream iss(s);
  std::vector<double> out;
  double v;
  while (iss >> v) out.push_back(v);
  return out;
}

inline Vector to_vector(const std::vector<double>& v) {
  Vector out(v.size());
  for (size_t j = 0; j < v.size(); ++j) out[j] = v[j];
  return out;
}

}  // namespace detail

inline AlgorithmChoice parse_algorithm_choice(const std::string& s) {
  if (s == "dpofa") return AlgorithmChoice::Dpofa;
  if (s == "ddfa") return AlgorithmChoice::Ddfa;
  if (s == "both") return AlgorithmChoice::Both;
  throw ValidationError("unknown algorithm '" + s + "' (expected dpofa, ddfa or both)");
}

/// Config files are key-value pairs grouped into [run], [problem],
/// [agent] (repeated, in order) and [graph] sections. '#' starts a
/// comment. CLI flags override file values.
inline ExperimentConfig parse_config(std::istream& in, const std::string& name) {
  ExperimentConfig cfg;
  cfg.name = name;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      if (section == "agent") cfg.agents.emplace_back();
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, "config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    try {
      if (section == "run") {
        if (key == "algorithm") cfg.algorithm = parse_algorithm_choice(value);
        else if (key == "h") cfg.h = std::stod(value);
        else if (key == "t_end") cfg.t_end = std::stod(value);
        else if (key == "tol") cfg.tol = std::stod(value);
        else if (key == "sample_stride") cfg.sample_stride = std::stoi(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "out") cfg.output_path = value;
        else if (key == "init_primal") cfg.init_primal = detail::to_vector(detail::parse_doubles(value));
        else if (key == "init_lambda") cfg.init_lambda = detail::to_vector(detail::parse_doubles(value));
        else if (key == "init_z") cfg.init_z = detail::to_vector(detail::parse_doubles(value));
        else throw ValidationError("unknown [run] key '" + key + "'");
      } else if (section == "problem") {
        if (key == "builtin") cfg.builtin = value;
        else if (key == "m") cfg.m = std::stoi(value);
        else if (key == "d0") cfg.d0 = detail::parse_doubles(value);
        else throw ValidationError("unknown [problem] key '" + key + "'");
      } else if (section == "agent") {
        require(!cfg.agents.empty(), "config: [agent] section expected");
        auto& a = cfg.agents.back();
        if (key == "dim") a.dim = std::stoi(value);
        else if (key == "objective") a.objective = value;
        else if (key == "set") a.set = value;
        else if (key == "w") a.w = detail::parse_doubles(value);
        else throw ValidationError("unknown [agent] key '" + key + "'");
      } else if (section == "graph") {
        if (key == "topology") cfg.graph_topology = value;
        else if (key == "edge") {
          std::istringstream iss(value);
          int i, j;
          double w = 1.0;
          require(static_cast<bool>(iss >> i >> j), "config: edge needs two node indices");
          iss >> w;
          cfg.graph_edges.emplace_back(i, j, w);
        } else throw ValidationError("unknown [graph] key '" + key + "'");
      } else {
        throw ValidationError("config: key '" + key + "' outside a known section");
      }
    } catch (const std::invalid_argument&) {
      throw ValidationError("config line " + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open config file " + path);
  std::string name = path;
  const auto slash = name.find_last_of('/');
  if (slash != std::string::npos) name = name.substr(slash + 1);
  const auto dot = name.find_last_of('.');
  if (dot != std::string::npos) name = name.substr(0, dot);
  return parse_config(in, name);
}

inline ObjectiveOracle make_objective(const std::string& spec, int dim) {
  std::istringstream iss(spec);
  std::string kind;
  iss >> kind;
  if (kind == "quad_abs") {
    require(dim == 1, "objective quad_abs is scalar only");
    return objectives::quad_abs();
  }
  if (kind == "sumsq") return objectives::sum_squares();
  if (kind == "quadratic") {
    std::vector<double> vals;
    double v;
    while (iss >> v) vals.push_back(v);
    require(static_cast<int>(vals.size()) == 2 * dim,
            "objective quadratic needs " + std::to_string(2 * dim) + " numbers (a then b)");
    Vector a(dim), b(dim);
    for (int j = 0; j < dim; ++j) {
      a[j] = vals[j];
      b[j] = vals[dim + j];
    }
    return objectives::diagonal_quadratic(std::move(a), std::move(b));
  }
  throw ValidationError("unknown objective '" + kind + "'");
}

inline ConvexSet make_set(const std::string& spec, int dim) {
  std::istringstream iss(spec);
  std::string kind;
  iss >> kind;
  std::vector<double> vals;
  double v;
  while (iss >> v) vals.push_back(v);
  if (kind == "free") return ConvexSet::full_space(dim);
  if (kind == "interval") {
    require(dim == 1 && vals.size() == 2, "set interval needs scalar agent and two bounds");
    return ConvexSet::interval(vals[0], vals[1]);
  }
  if (kind == "box") {
    require(static_cast<int>(vals.size()) == 2 * dim, "set box needs lo then hi, 2*dim values");
    Vector lo(dim), hi(dim);
    for (int j = 0; j < dim; ++j) {
      lo[j] = vals[j];
      hi[j] = vals[dim + j];
    }
    return ConvexSet::box(std::move(lo), std::move(hi));
  }
  if (kind == "ball") {
    require(static_cast<int>(vals.size()) == dim + 1, "set ball needs center then radius");
    Vector c(dim);
    for (int j = 0; j < dim; ++j) c[j] = vals[j];
    return ConvexSet::ball(std::move(c), vals[dim]);
  }
  throw ValidationError("unknown set '" + kind + "'");
}

inline BuiltinInstance resolve_builtin(const std::string& name, unsigned long long seed) {
  if (name == "nonsmooth10") return builtin_nonsmooth10();
  if (name == "netflow6x12") return builtin_netflow6x12();
  if (name == "minnorm") return builtin_minnorm(seed);
  throw ValidationError("unknown builtin '" + name +
                        "' (expected nonsmooth10, netflow6x12 or minnorm)");
}

inline BuiltinInstance build_instance(const ExperimentConfig& cfg) {
  if (cfg.builtin) return resolve_builtin(*cfg.builtin, cfg.seed);
  require(cfg.m >= 1, "config: [problem] m must be set for inline problems");
  require(static_cast<int>(cfg.d0.size()) == cfg.m, "config: d0 must have m values");
  require(!cfg.agents.empty(), "config: inline problem needs [agent] sections");

  const Vector d0 = detail::to_vector(cfg.d0);
  const int n = static_cast<int>(cfg.agents.size());
  const auto shares = split_supply(d0, n);
  std::vector<AgentProblem> agents;
  for (int i = 0; i < n; ++i) {
    const auto& a = cfg.agents[i];
    require(a.dim >= 1, "config: agent " + std::to_string(i) + " dim must be >= 1");
    require(static_cast<int>(a.w.size()) == cfg.m * a.dim,
            "config: agent " + std::to_string(i) + " w needs m*dim values");
    Matrix w(cfg.m, a.dim);
    for (int r = 0; r < cfg.m; ++r)
      for (int c = 0; c < a.dim; ++c) w(r, c) = a.w[r * a.dim + c];
    agents.push_back(AgentProblem{make_objective(a.objective, a.dim), make_set(a.set, a.dim),
                                  std::move(w), shares[i], a.dim});
  }
  EmoProblem problem(std::move(agents), cfg.m, d0);

  CommGraph graph = [&] {
    if (cfg.graph_topology == "ring") return CommGraph::ring(n);
    if (cfg.graph_topology == "complete") return CommGraph::complete(n);
    if (cfg.graph_topology == "edges") return CommGraph::from_edges(n, cfg.graph_edges);
    throw ValidationError("unknown graph topology '" + cfg.graph_topology + "'");
  }();
  return BuiltinInstance{std::move(problem), std::move(graph)};
}

}  // namespace emoflow
