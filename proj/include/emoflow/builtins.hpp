#pragma once

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "emoflow/graph.hpp"
#include "emoflow/problem.hpp"
#include "emoflow/types.hpp"

namespace emoflow {

namespace objectives {

/// f(x) = x^2 + |x| on scalars, with the sign selection 0 at x = 0
/// (the minimal-norm subgradient, so equilibria are exactly stationary).
inline ObjectiveOracle quad_abs() {
  ObjectiveOracle o;
  o.value = [](const Vector& x) { return x[0] * x[0] + std::abs(x[0]); };
  o.subgradient = [](const Vector& x) {
    Vector g(1);
    g[0] = 2.0 * x[0] + (x[0] > 0.0 ? 1.0 : (x[0] < 0.0 ? -1.0 : 0.0));
    return g;
  };
  o.smooth = false;
  o.strictly_convex = true;
  return o;
}

/// f(x) = ||x||^2.
inline ObjectiveOracle sum_squares() {
  ObjectiveOracle o;
  o.value = [](const Vector& x) { return x.squaredNorm(); };
  o.subgradient = [](const Vector& x) { return Vector(2.0 * x); };
  o.smooth = true;
  o.strictly_convex = true;
  return o;
}

/// f(x) = 1/2 (x - b)' diag(a) (x - b) with a > 0 componentwise.
inline ObjectiveOracle diagonal_quadratic(Vector a, Vector b) {
  require(a.size() == b.size(), "diagonal_quadratic: size mismatch");
  for (Eigen::Index j = 0; j < a.size(); ++j)
    require(a[j] > 0.0, "diagonal_quadratic: curvature must be positive");
  ObjectiveOracle o;
  o.value = [a, b](const Vector& x) {
    return 0.5 * (x - b).dot(a.asDiagonal() * (x - b));
  };
  o.subgradient = [a, b](const Vector& x) { return Vector(a.asDiagonal() * (x - b)); };
  o.smooth = true;
  o.strictly_convex = true;
  return o;
}

}  // namespace objectives

struct BuiltinInstance {
  EmoProblem problem;
  CommGraph graph;
};

/// Ten scalar agents minimizing sum(x_i^2 + |x_i|) subject to A x = [3, 2]
/// and |x_i| <= 1, each agent holding one column of A and a uniform
/// supply share [0.3, 0.2]. Communication over a unit-weight ring.
inline BuiltinInstance builtin_nonsmooth10() {
  const int n = 10, m = 2;
  Matrix a(m, n);
  a << 1, 1, 1, 0, 0, 1, 1, 1, 0, 0,
       1, 0, 0, 1, 1, 1, 0, 0, 1, 1;
  Vector d0(m);
  d0 << 3.0, 2.0;
  const auto supplies = split_supply(d0, n);

  std::vector<AgentProblem> agents;
  agents.reserve(n);
  for (int i = 0; i < n; ++i) {
    AgentProblem ap{objectives::quad_abs(), ConvexSet::interval(-1.0, 1.0), a.col(i),
                    supplies[i], 1};
    agents.push_back(std::move(ap));
  }
  return BuiltinInstance{EmoProblem(std::move(agents), m, d0), CommGraph::ring(n)};
}

/// Directed flow network for the builtin netflow instance.
struct NetworkSpec {
  int nodes = 0;
  std::vector<std::pair<int, int>> arcs;  // (tail, head), 0-based
  Vector supplies;                        // length nodes * commodities
  int commodities = 1;
  double flow_lo = 0.0;
  double flow_hi = 10.0;
};

/// Six nodes, twelve arcs: sources {0, 4, 5}, sinks {1, 2, 3}, every
/// source connected to every sink plus the cycle 0 -> 4 -> 5 -> 0 so
/// that a strictly interior feasible flow exists.
inline NetworkSpec default_netflow_spec() {
  NetworkSpec spec;
  spec.nodes = 6;
  spec.arcs = {{0, 1}, {0, 2}, {0, 3}, {4, 1}, {4, 2}, {4, 3},
               {5, 1}, {5, 2}, {5, 3}, {0, 4}, {4, 5}, {5, 0}};
  spec.supplies = Vector(6);
  spec.supplies << 6.0, -7.2, -4.8, -9.6, 8.4, 7.2;
  return spec;
}

/// EMO instance for the minimum-cost flow problem: one agent per arc with
/// f_k = ||x_k||^2, box flow capacities, and the arc's incidence column
/// (+1 at the tail, -1 at the head) as its constraint block.
inline EmoProblem builtin_netflow(const NetworkSpec& spec) {
  require(spec.nodes >= 2, "netflow: need at least two nodes");
  require(!spec.arcs.empty(), "netflow: no arcs");
  require(spec.commodities >= 1, "netflow: commodities must be >= 1");
  const int s = spec.commodities;
  const int m = spec.nodes * s;
  require(static_cast<int>(spec.supplies.size()) == m, "netflow: supplies length mismatch");
  for (int c = 0; c < s; ++c) {
    double total = 0.0;
    for (int i = 0; i < spec.nodes; ++i) total += spec.supplies[i * s + c];
    require(std::abs(total) <= 1e-9,
            "netflow: supplies must sum to zero for commodity " + std::to_string(c));
  }

  const int n = static_cast<int>(spec.arcs.size());
  const auto shares = split_supply(spec.supplies, n);
  std::vector<AgentProblem> agents;
  agents.reserve(n);
  for (int k = 0; k < n; ++k) {
    const auto [tail, head] = spec.arcs[k];
    require(tail >= 0 && tail < spec.nodes && head >= 0 && head < spec.nodes && tail != head,
            "netflow: bad arc " + std::to_string(k));
    Matrix w = Matrix::Zero(m, s);
    for (int c = 0; c < s; ++c) {
      w(tail * s + c, c) = 1.0;
      w(head * s + c, c) = -1.0;
    }
    std::vector<ConvexSet> factors(s, ConvexSet::interval(spec.flow_lo, spec.flow_hi));
    AgentProblem ap{objectives::sum_squares(), ConvexSet::product(std::move(factors)),
                    std::move(w), shares[k], s};
    agents.push_back(std::move(ap));
  }
  return EmoProblem(std::move(agents), m, spec.supplies);
}

inline BuiltinInstance builtin_netflow6x12() {
  EmoProblem problem = builtin_netflow(default_netflow_spec());
  const int n = problem.n();
  return BuiltinInstance{std::move(problem), CommGraph::ring(n)};
}

/// Seeded random minimum-norm instance: minimize sum ||x_i||^2 subject to
/// W x = d0 with W in R^{3x8} and no set constraints, split over four
/// two-dimensional agents. The least-norm closed form W'(WW')^{-1} d0 is
/// the reference solution.
inline BuiltinInstance builtin_minnorm(unsigned long long seed = 42) {
  const int m = 3, n_agents = 4, q = 2;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix w(m, n_agents * q);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n_agents * q; ++c) w(r, c) = normal(rng);
  Vector d0(m);
  for (int r = 0; r < m; ++r) d0[r] = normal(rng);

  const auto shares = split_supply(d0, n_agents);
  std::vector<AgentProblem> agents;
  for (int i = 0; i < n_agents; ++i) {
    AgentProblem ap{objectives::sum_squares(), ConvexSet::full_space(q),
                    w.middleCols(i * q, q), shares[i], q};
    agents.push_back(std::move(ap));
  }
  return BuiltinInstance{EmoProblem(std::move(agents), m, d0), CommGraph::ring(n_agents)};
}

}  // namespace emoflow
