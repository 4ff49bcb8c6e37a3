#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "emoflow/convex_set.hpp"
#include "emoflow/graph.hpp"
#include "emoflow/types.hpp"

namespace emoflow {

/// Value/subgradient access to one agent's convex objective. The
/// subgradient map returns a single selection g(x) in the subdifferential.
struct ObjectiveOracle {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> subgradient;
  bool smooth = false;           // subgradient is a true Lipschitz gradient
  bool strictly_convex = false;  // declared by the problem builder
};

struct AgentProblem {
  ObjectiveOracle objective;
  ConvexSet constraint_set;
  Matrix w_block;  // m x q_i
  Vector supply;   // d_i, length m
  int dim;         // q_i
};

class EmoProblem {
 public:
  EmoProblem(std::vector<AgentProblem> agents, int m, Vector d0)
      : agents_(std::move(agents)), m_(m), d0_(std::move(d0)) {
    require(!agents_.empty(), "problem: no agents");
    require(m_ >= 1, "problem: m must be >= 1");
    require(static_cast<int>(d0_.size()) == m_, "problem: d0 length != m");
    offsets_.resize(agents_.size());
    int off = 0;
    Vector supply_sum = Vector::Zero(m_);
    for (size_t i = 0; i < agents_.size(); ++i) {
      const auto& a = agents_[i];
      require(a.dim >= 1, "problem: agent " + std::to_string(i) + " has dim < 1");
      require(a.constraint_set.dim() == a.dim,
              "problem: agent " + std::to_string(i) + " set dim mismatch");
      require(a.w_block.rows() == m_ && static_cast<int>(a.w_block.cols()) == a.dim,
              "problem: agent " + std::to_string(i) + " w_block must be m x q_i");
      require(static_cast<int>(a.supply.size()) == m_,
              "problem: agent " + std::to_string(i) + " supply length != m");
      supply_sum += a.supply;
      offsets_[i] = off;
      off += a.dim;
    }
    total_dim_ = off;
    require((supply_sum - d0_).lpNorm<Eigen::Infinity>() <= 1e-9,
            "problem: agent supplies do not sum to d0");
  }

  int n() const { return static_cast<int>(agents_.size()); }
  int m() const { return m_; }
  int total_dim() const { return total_dim_; }
  const Vector& d0() const { return d0_; }
  const std::vector<AgentProblem>& agents() const { return agents_; }
  const AgentProblem& agent(int i) const { return agents_.at(i); }
  int offset(int i) const { return offsets_.at(i); }

  auto block(const Vector& x, int i) const { return x.segment(offsets_.at(i), agents_[i].dim); }

  double value(const Vector& x) const {
    double s = 0.0;
    for (int i = 0; i < n(); ++i) s += agents_[i].objective.value(block(x, i));
    return s;
  }

  Vector subgradient(const Vector& x) const {
    Vector g(total_dim_);
    for (int i = 0; i < n(); ++i)
      g.segment(offsets_[i], agents_[i].dim) = agents_[i].objective.subgradient(block(x, i));
    return g;
  }

  bool smooth() const {
    for (const auto& a : agents_)
      if (!a.objective.smooth) return false;
    return true;
  }

  /// Stacked per-agent supplies [d_1; ...; d_n], length n*m.
  Vector d_stacked() const {
    Vector d(n() * m_);
    for (int i = 0; i < n(); ++i) d.segment(i * m_, m_) = agents_[i].supply;
    return d;
  }

 private:
  std::vector<AgentProblem> agents_;
  int m_;
  Vector d0_;
  std::vector<int> offsets_;
  int total_dim_ = 0;
};

struct StackedForm {
  Matrix W;          // m x total_dim, horizontal concatenation of W_i
  Matrix Wbar;       // n*m x total_dim, block diagonal of W_i
  ConvexSet omega;   // product of agent sets
  int total_dim;
};

inline StackedForm stack(const EmoProblem& problem) {
  const int n = problem.n(), m = problem.m(), q = problem.total_dim();
  Matrix w = Matrix::Zero(m, q);
  Matrix wbar = Matrix::Zero(n * m, q);
  std::vector<ConvexSet> sets;
  sets.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto& a = problem.agent(i);
    w.middleCols(problem.offset(i), a.dim) = a.w_block;
    wbar.block(i * m, problem.offset(i), m, a.dim) = a.w_block;
    sets.push_back(a.constraint_set);
  }
  return StackedForm{std::move(w), std::move(wbar), ConvexSet::product(std::move(sets)), q};
}

/// Splits d0 across n agents; weights default to uniform and must sum
/// to 1. The rounding residual goes to the last agent so the parts sum
/// to d0 exactly.
inline std::vector<Vector> split_supply(const Vector& d0, int n,
                                        const std::optional<Vector>& weights = std::nullopt) {
  require(n >= 1, "split_supply: n must be >= 1");
  Vector w;
  if (weights) {
    require(static_cast<int>(weights->size()) == n, "split_supply: weights length != n");
    require(std::abs(weights->sum() - 1.0) <= 1e-12, "split_supply: weights must sum to 1");
    w = *weights;
  } else {
    w = Vector::Constant(n, 1.0 / n);
  }
  std::vector<Vector> parts(n);
  Vector acc = Vector::Zero(d0.size());
  for (int i = 0; i + 1 < n; ++i) {
    parts[i] = w[i] * d0;
    acc += parts[i];
  }
  parts[n - 1] = d0 - acc;
  return parts;
}

struct ValidationCheck {
  std::string name;
  bool pass;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool ok() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

/// Best-effort check of the standing assumptions: graph connectivity
/// (exact), dimensional consistency (exact), and convexity of the
/// objectives by random sampling. Connectivity failures are hard errors
/// at solve entry points.
inline ValidationReport validate(const EmoProblem& problem, const CommGraph& graph,
                                 int convexity_samples = 200, unsigned seed = 1234) {
  ValidationReport report;
  report.checks.push_back({"agents_match_graph", graph.n() == problem.n(),
                           graph.n() == problem.n() ? "" : "graph node count != agent count"});
  report.checks.push_back({"graph_connected", graph.is_connected(),
                           graph.is_connected() ? "" : "communication graph is disconnected"});

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  bool convex_ok = true;
  std::string convex_detail;
  for (int i = 0; i < problem.n() && convex_ok; ++i) {
    const auto& a = problem.agent(i);
    auto bounds = a.constraint_set.box_bounds();
    for (int s = 0; s < convexity_samples; ++s) {
      Vector x(a.dim), y(a.dim);
      for (int j = 0; j < a.dim; ++j) {
        x[j] = unif(rng);
        y[j] = unif(rng);
      }
      x = a.constraint_set.project(x);
      y = a.constraint_set.project(y);
      const double gap =
          a.objective.value(y) - a.objective.value(x) - a.objective.subgradient(x).dot(y - x);
      if (gap < -1e-9) {
        convex_ok = false;
        convex_detail = "convexity probe failed for agent " + std::to_string(i);
        break;
      }
      if (a.objective.strictly_convex && (x - y).norm() > 1e-6) {
        const double mono =
            (a.objective.subgradient(x) - a.objective.subgradient(y)).dot(x - y);
        if (mono <= 0.0) {
          convex_ok = false;
          convex_detail = "strict monotonicity probe failed for agent " + std::to_string(i);
          break;
        }
      }
      (void)bounds;
    }
  }
  report.checks.push_back({"objective_convexity", convex_ok, convex_detail});
  return report;
}

}  // namespace emoflow
