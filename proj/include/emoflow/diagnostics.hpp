#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "emoflow/dynamics.hpp"
#include "emoflow/graph.hpp"
#include "emoflow/problem.hpp"
#include "emoflow/types.hpp"

namespace emoflow {

/// Optimality residuals: all three vanish exactly at an optimal
/// primal/multiplier pair.
struct KktReport {
  double stationarity;  // ||P_Omega(x - g(x) + W' lambda_bar) - x||_inf
  double feasibility;   // ||W x - d0||_inf
  double consensus;     // ||L lambda||_inf (0 for a centralized multiplier)
  Vector lambda_bar;    // length m
};

inline KktReport kkt_residual_central(const EmoProblem& problem, const StackedForm& stacked,
                                      const Vector& x, const Vector& lambda_bar) {
  require(static_cast<int>(x.size()) == problem.total_dim(), "kkt: x length mismatch");
  require(static_cast<int>(lambda_bar.size()) == problem.m(), "kkt: lambda_bar length mismatch");
  KktReport r;
  r.lambda_bar = lambda_bar;
  const Vector g = problem.subgradient(x);
  r.stationarity =
      (stacked.omega.project(x - g + stacked.W.transpose() * lambda_bar) - x)
          .lpNorm<Eigen::Infinity>();
  r.feasibility = (stacked.W * x - problem.d0()).lpNorm<Eigen::Infinity>();
  r.consensus = 0.0;
  return r;
}

/// Stacked variant: lambda carries one block per agent; lambda_bar is the
/// blockwise mean and consensus is measured through the graph Laplacian.
inline KktReport kkt_residual(const EmoProblem& problem, const StackedForm& stacked,
                              const CommGraph& graph, const Vector& x,
                              const Vector& lambda_stacked) {
  const int n = problem.n(), m = problem.m();
  require(static_cast<int>(lambda_stacked.size()) == n * m, "kkt: lambda length mismatch");
  Vector lambda_bar = Vector::Zero(m);
  for (int i = 0; i < n; ++i) lambda_bar += lambda_stacked.segment(i * m, m);
  lambda_bar /= n;
  KktReport r = kkt_residual_central(problem, stacked, x, lambda_bar);
  r.consensus = graph.neighbor_diff(lambda_stacked, m).lpNorm<Eigen::Infinity>();
  return r;
}

/// Equilibrium of either flow, built from a centralized solution:
/// lambda* = 1_n (x) lambda_bar, z* the minimum-norm solution of
/// L z* = d - Wbar x*, and (DPOFA only) y* = x* - g(x*) + Wbar' lambda*.
struct Equilibrium {
  Vector x_star;
  Vector lambda_star;
  Vector z_star;
  std::optional<Vector> y_star;
};

struct OracleSolution {
  Vector x_star;
  Vector lambda_bar;
  double kkt_residual;
  long iterations;
};

namespace detail {

// 1-D inner problem: minimize f(x) - c x over [lo, hi]. The subgradient
// map is monotone, so bisect on its sign.
inline double minimize_1d(const ObjectiveOracle& obj, double lo, double hi, double c) {
  auto slope = [&](double x) {
    Vector v(1);
    v[0] = x;
    return obj.subgradient(v)[0] - c;
  };
  constexpr double inf = std::numeric_limits<double>::infinity();
  double a = lo, b = hi;
  if (a == -inf || b == inf) {
    // Expand a bracket around 0 until the slope changes sign.
    double r = 1.0;
    a = std::isfinite(lo) ? lo : -r;
    b = std::isfinite(hi) ? hi : r;
    for (int k = 0; k < 200; ++k) {
      bool grown = false;
      if (!std::isfinite(lo) && slope(a) > 0.0) {
        a *= 2.0;
        grown = true;
      }
      if (!std::isfinite(hi) && slope(b) < 0.0) {
        b *= 2.0;
        grown = true;
      }
      if (!grown) break;
    }
  }
  if (slope(a) >= 0.0) return a;
  if (slope(b) <= 0.0) return b;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (a + b);
    if (slope(mid) >= 0.0)
      b = mid;
    else
      a = mid;
  }
  return 0.5 * (a + b);
}

// Multi-dimensional inner problem: minimize f(x) - c'x over the agent's
// set by projected gradient with backtracking.
inline Vector minimize_nd(const ObjectiveOracle& obj, const ConvexSet& set, const Vector& c,
                          double tol, int max_iter) {
  Vector x = set.project(Vector::Zero(c.size()));
  // Fixed-step projected gradient with the step set from a local
  // curvature estimate (t <= 1/L keeps the map monotone and contractive),
  // so no per-iteration line search is needed and the iterate can
  // approach the optimum to full precision. Halving on a genuine value
  // increase is kept as a safety net for non-quadratic curvature.
  double lip = 1e-12;
  {
    const double delta = 1e-4;
    const Vector g0 = obj.subgradient(x);
    for (int j = 0; j < x.size(); ++j) {
      Vector xp = x;
      xp[j] += delta;
      lip = std::max(lip, (obj.subgradient(xp) - g0).norm() / delta);
    }
  }
  double step = std::min(1.0, 0.5 / lip);
  auto value = [&](const Vector& v) { return obj.value(v) - c.dot(v); };
  double fx = value(x);
  for (int k = 0; k < max_iter; ++k) {
    const Vector grad = obj.subgradient(x) - c;
    if ((set.project(x - grad) - x).lpNorm<Eigen::Infinity>() < tol) break;
    const Vector cand = set.project(x - step * grad);
    const double fc = value(cand);
    if (fc > fx + 1e-14 * (1.0 + std::abs(fx))) {
      step *= 0.5;
      if (step < 1e-14) break;
      continue;
    }
    x = cand;
    fx = fc;
  }
  return x;
}

// Separable Lagrangian minimizer: x(lambda_bar) agent by agent.
inline Vector lagrangian_argmin(const EmoProblem& problem, const Vector& lambda_bar,
                                double inner_tol) {
  Vector x(problem.total_dim());
  for (int i = 0; i < problem.n(); ++i) {
    const auto& a = problem.agent(i);
    const Vector c = a.w_block.transpose() * lambda_bar;
    if (a.dim == 1) {
      auto bounds = a.constraint_set.box_bounds();
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      if (bounds) {
        lo = bounds->lo[0];
        hi = bounds->hi[0];
      }
      x[problem.offset(i)] = minimize_1d(a.objective, lo, hi, c[0]);
    } else {
      x.segment(problem.offset(i), a.dim) =
          minimize_nd(a.objective, a.constraint_set, c, inner_tol, 20000);
    }
  }
  return x;
}

}  // namespace detail

/// Centralized reference solver: damped semismooth Newton on the dual
/// residual r(lambda) = d0 - W x(lambda), where x(lambda) is the exact
/// separable Lagrangian minimizer. Ground truth for tests and fixtures.
inline OracleSolution centralized_oracle(const EmoProblem& problem, double tol = 1e-10,
                                         long max_iter = 400) {
  const StackedForm stacked = stack(problem);
  const int m = problem.m();
  const double inner_tol = std::min(tol * 1e-2, 1e-11);

  Vector lambda = Vector::Zero(m);
  Vector x = detail::lagrangian_argmin(problem, lambda, inner_tol);
  Vector r = problem.d0() - stacked.W * x;
  double best = r.lpNorm<Eigen::Infinity>();
  Vector best_lambda = lambda, best_x = x;

  long it = 0;
  for (; it < max_iter && best > tol * 0.1; ++it) {
    // Finite-difference Jacobian of r with respect to lambda.
    Matrix jac(m, m);
    const double eps = 1e-6 * std::max(1.0, lambda.lpNorm<Eigen::Infinity>());
    for (int j = 0; j < m; ++j) {
      Vector lp = lambda;
      lp[j] += eps;
      jac.col(j) = (problem.d0() - stacked.W * detail::lagrangian_argmin(problem, lp, inner_tol) - r) / eps;
    }
    // Ridge-regularized least-squares Newton step; the ridge keeps
    // rank-deficient constraint matrices (e.g. incidence matrices) stable.
    Matrix jtj = jac.transpose() * jac;
    jtj.diagonal().array() += 1e-12 + 1e-8 * jtj.diagonal().maxCoeff();
    Vector step = jtj.ldlt().solve(jac.transpose() * (-r));

    double damping = 1.0;
    for (int bt = 0; bt < 40; ++bt) {
      const Vector cand = lambda + damping * step;
      const Vector xc = detail::lagrangian_argmin(problem, cand, inner_tol);
      const Vector rc = problem.d0() - stacked.W * xc;
      if (rc.lpNorm<Eigen::Infinity>() < r.lpNorm<Eigen::Infinity>() * (1.0 - 1e-4 * damping) ||
          rc.lpNorm<Eigen::Infinity>() < tol * 0.1) {
        lambda = cand;
        x = xc;
        r = rc;
        break;
      }
      damping *= 0.5;
      if (bt == 39) {
        // Fall back to a small dual gradient step.
        lambda += 1e-3 * r;
        x = detail::lagrangian_argmin(problem, lambda, inner_tol);
        r = problem.d0() - stacked.W * x;
      }
    }
    if (r.lpNorm<Eigen::Infinity>() < best) {
      best = r.lpNorm<Eigen::Infinity>();
      best_lambda = lambda;
      best_x = x;
    }
  }

  // Final polish of the primal at the best multiplier.
  best_x = detail::lagrangian_argmin(problem, best_lambda, inner_tol * 0.1);

  OracleSolution sol;
  sol.x_star = best_x;
  sol.lambda_bar = best_lambda;
  sol.iterations = it;
  const KktReport rep = kkt_residual_central(problem, stacked, sol.x_star, sol.lambda_bar);
  sol.kkt_residual = std::max({rep.stationarity, rep.feasibility});
  if (sol.kkt_residual > tol)
    throw NumericalError("centralized_oracle: no convergence, best residual " +
                         std::to_string(sol.kkt_residual));
  return sol;
}

inline Equilibrium build_equilibrium(const EmoSystem& system, const Vector& x_star,
                                     const Vector& lambda_bar, Algorithm alg,
                                     double tol = 1e-8) {
  const EmoProblem& problem = system.problem();
  const int n = problem.n(), m = problem.m();
  const KktReport rep = kkt_residual_central(problem, system.stacked(), x_star, lambda_bar);
  require(std::max(rep.stationarity, rep.feasibility) <= 1e-6,
          "build_equilibrium: inputs do not satisfy the optimality conditions");

  Equilibrium eq;
  eq.x_star = x_star;
  eq.lambda_star = Vector(n * m);
  for (int i = 0; i < n; ++i) eq.lambda_star.segment(i * m, m) = lambda_bar;

  // Minimum-norm solution of L z* = d - Wbar x*.
  const Matrix l = system.graph().stacked_laplacian(m);
  const Vector rhs = system.d_stacked() - system.stacked().Wbar * x_star;
  eq.z_star = l.completeOrthogonalDecomposition().solve(rhs);
  if ((l * eq.z_star - rhs).lpNorm<Eigen::Infinity>() > tol)
    throw NumericalError("build_equilibrium: d - Wbar x* is not in range(L)");

  if (alg == Algorithm::Dpofa) {
    eq.y_star = x_star - problem.subgradient(x_star) +
                system.stacked().Wbar.transpose() * eq.lambda_star;
  }
  return eq;
}

/// V(y, lambda, z) = 1/2(||y - P(y*)||^2 - ||y - P(y)||^2)
///                 + 1/2 ||lambda - lambda*||^2 + 1/2 ||z - z*||^2.
inline double lyapunov_dpofa(const EmoSystem& system, const SolverState& s,
                             const Equilibrium& eq) {
  require(eq.y_star.has_value(), "lyapunov_dpofa: equilibrium lacks y*");
  return system.stacked().omega.merit(s.primal, *eq.y_star) +
         0.5 * (s.lambda - eq.lambda_star).squaredNorm() +
         0.5 * (s.z - eq.z_star).squaredNorm();
}

/// V(x, lambda, z) = f(x) - f(x*) + lambda*'(d - Wbar x) + 1/2 ||x - x*||^2
///                 + 1/2 ||lambda - lambda*||^2 + 1/2 ||z - z*||^2,
/// valid (and nonnegative) only on Omega.
inline double lyapunov_ddfa(const EmoSystem& system, const SolverState& s,
                            const Equilibrium& eq) {
  require(system.stacked().omega.contains(s.primal, 1e-9), "lyapunov_ddfa: x not in Omega");
  const EmoProblem& problem = system.problem();
  return problem.value(s.primal) - problem.value(eq.x_star) +
         eq.lambda_star.dot(system.d_stacked() - system.stacked().Wbar * s.primal) +
         0.5 * (s.primal - eq.x_star).squaredNorm() +
         0.5 * (s.lambda - eq.lambda_star).squaredNorm() +
         0.5 * (s.z - eq.z_star).squaredNorm();
}

}  // namespace emoflow
