#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "emoflow/dynamics.hpp"
#include "emoflow/problem.hpp"
#include "emoflow/types.hpp"

namespace emoflow {

/// Shortest representation that round-trips a double (17 significant digits).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline void hash_bytes(uint64_t& h, const void* data, size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;  // FNV-1a
  }
}

inline void hash_double(uint64_t& h, double v) { hash_bytes(h, &v, sizeof(v)); }

}  // namespace detail

/// Content hash of a problem instance: dimensions, constraint data, set
/// geometry (via projection probes) and objective values at probe points.
/// Ties a fixture file to the problem it was generated for.
inline uint64_t problem_hash(const EmoProblem& problem) {
  uint64_t h = 1469598103934665603ull;
  detail::hash_double(h, problem.n());
  detail::hash_double(h, problem.m());
  for (Eigen::Index j = 0; j < problem.d0().size(); ++j) detail::hash_double(h, problem.d0()[j]);
  for (int i = 0; i < problem.n(); ++i) {
    const auto& a = problem.agent(i);
    detail::hash_double(h, a.dim);
    for (Eigen::Index r = 0; r < a.w_block.rows(); ++r)
      for (Eigen::Index c = 0; c < a.w_block.cols(); ++c) detail::hash_double(h, a.w_block(r, c));
    for (Eigen::Index j = 0; j < a.supply.size(); ++j) detail::hash_double(h, a.supply[j]);
    // Probe the objective and the set at a few fixed points.
    for (double t : {-1.5, -0.25, 0.5, 2.0}) {
      const Vector u = Vector::Constant(a.dim, t);
      detail::hash_double(h, a.objective.value(u));
      const Vector pu = a.constraint_set.project(u);
      for (Eigen::Index j = 0; j < pu.size(); ++j) detail::hash_double(h, pu[j]);
    }
  }
  return h;
}

inline std::string problem_hash_hex(const EmoProblem& problem) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(problem_hash(problem)));
  return buf;
}

/// Committed oracle solution used as ground truth by tests and the CLI.
struct Fixture {
  std::string problem_hash;
  double tol = 0.0;
  int oracle_version = 0;
  Vector x_star;
  Vector lambda_bar;
};

inline void write_fixture(const std::string& path, const Fixture& f) {
  std::ofstream out(path);
  require(out.good(), "write_fixture: cannot open " + path);
  out << "# emoflow oracle fixture\n";
  out << "problem_hash = " << f.problem_hash << "\n";
  out << "tol = " << format_double(f.tol) << "\n";
  out << "oracle_version = " << f.oracle_version << "\n";
  out << "x_star =";
  for (Eigen::Index j = 0; j < f.x_star.size(); ++j) out << " " << format_double(f.x_star[j]);
  out << "\nlambda_bar =";
  for (Eigen::Index j = 0; j < f.lambda_bar.size(); ++j)
    out << " " << format_double(f.lambda_bar[j]);
  out << "\n";
}

inline Fixture read_fixture(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "read_fixture: cannot open " + path);
  Fixture f;
  std::string line;
  auto parse_vector = [](const std::string& rest) {
    std::istringstream iss(rest);
    std::vector<double> vals;
    double v;
    while (iss >> v) vals.push_back(v);
    Vector out(vals.size());
    for (size_t j = 0; j < vals.size(); ++j) out[j] = vals[j];
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(key.find_last_not_of(" \t") + 1);
    const std::string rest = line.substr(eq + 1);
    if (key == "problem_hash") {
      std::istringstream(rest) >> f.problem_hash;
    } else if (key == "tol") {
      f.tol = std::stod(rest);
    } else if (key == "oracle_version") {
      f.oracle_version = std::stoi(rest);
    } else if (key == "x_star") {
      f.x_star = parse_vector(rest);
    } else if (key == "lambda_bar") {
      f.lambda_bar = parse_vector(rest);
    }
  }
  require(f.x_star.size() > 0, "read_fixture: missing x_star in " + path);
  return f;
}

/// Telemetry CSV: header row, one row per sample, 17 significant digits.
inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  require(out.good(), "write_trajectory_csv: cannot open " + path);
  out << "t,f,eq_residual_sq,lambda_norm_sq,z_norm_sq";
  const Eigen::Index dim = traj.samples.empty() ? 0 : traj.samples.front().x.size();
  for (Eigen::Index j = 0; j < dim; ++j) out << ",x" << j;
  out << "\n";
  for (const auto& s : traj.samples) {
    out << format_double(s.t) << "," << format_double(s.f_value) << ","
        << format_double(s.eq_residual_sq) << "," << format_double(s.lambda_norm_sq) << ","
        << format_double(s.z_norm_sq);
    for (Eigen::Index j = 0; j < s.x.size(); ++j) out << "," << format_double(s.x[j]);
    out << "\n";
  }
}

inline std::vector<std::vector<double>> read_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "read_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream iss(line);
    std::string cell;
    while (std::getline(iss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace emoflow
