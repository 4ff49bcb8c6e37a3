#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "emoflow/graph.hpp"
#include "emoflow/problem.hpp"
#include "emoflow/types.hpp"

namespace emoflow {

enum class Algorithm { Dpofa, Ddfa };

inline const char* algorithm_name(Algorithm a) {
  return a == Algorithm::Dpofa ? "dpofa" : "ddfa";
}

/// Stacked solver state. `primal` is the auxiliary variable y for DPOFA
/// and the decision estimate x for DDFA.
struct SolverState {
  Vector primal;
  Vector lambda;
  Vector z;
  double t = 0.0;
};

struct TrajectorySample {
  double t;
  Vector x;
  double f_value;
  double eq_residual_sq;   // ||W x - d0||^2
  double lambda_norm_sq;
  double z_norm_sq;
};

struct Trajectory {
  Algorithm algorithm;
  double step;        // requested h
  double step_final;  // h after any chattering-guard halving
  bool converged = false;
  long steps = 0;
  std::vector<TrajectorySample> samples;
  std::vector<SolverState> states;  // populated when record_states is set
  SolverState final_state;
  double final_stationarity = 0.0;
  double final_feasibility = 0.0;
  double max_set_violation = 0.0;  // max over steps of dist(x, Omega)
  double max_z_drift = 0.0;        // max ||sum_i z_i(t) - sum_i z_i(0)||
  int chatter_halvings = 0;
};

/// Problem + communication graph bundled with the stacked matrices both
/// algorithms need. Connectivity is a hard requirement here.
class EmoSystem {
 public:
  EmoSystem(EmoProblem problem, CommGraph graph)
      : problem_(std::move(problem)), graph_(std::move(graph)),
        stacked_(stack(problem_)), d_(problem_.d_stacked()) {
    require(graph_.n() == problem_.n(), "system: graph node count != agent count");
    require(graph_.is_connected(), "system: communication graph must be connected");
  }

  const EmoProblem& problem() const { return problem_; }
  const CommGraph& graph() const { return graph_; }
  const StackedForm& stacked() const { return stacked_; }
  const Vector& d_stacked() const { return d_; }

  struct DpofaRhs {
    Vector dy, dlambda, dz;
    Vector output_x;  // P_Omega(y)
  };

  /// dy = -y + x - g(x) + Wbar' lambda with x = P_Omega(y),
  /// dlambda = d - Wbar x - L lambda - L z, dz = L lambda.
  DpofaRhs dpofa_rhs(const SolverState& s) const {
    check_dims(s);
    const int m = problem_.m();
    DpofaRhs r;
    r.output_x = stacked_.omega.project(s.primal);
    const Vector g = problem_.subgradient(r.output_x);
    r.dy = -s.primal + r.output_x - g + stacked_.Wbar.transpose() * s.lambda;
    const Vector l_lambda = graph_.neighbor_diff(s.lambda, m);
    r.dlambda = d_ - stacked_.Wbar * r.output_x - l_lambda - graph_.neighbor_diff(s.z, m);
    r.dz = l_lambda;
    return r;
  }

  struct DdfaRhs {
    Vector dx, dlambda, dz;
  };

  /// p = P_Omega[x - g(x) + Wbar' lambda] - x; dx = p,
  /// dlambda = d - Wbar x - L lambda - L z - Wbar p, dz = L lambda.
  /// The derivative feedback enters by substituting p, never by
  /// numerical differentiation.
  DdfaRhs ddfa_rhs(const SolverState& s) const {
    check_dims(s);
    if (!stacked_.omega.contains(s.primal, 1e-9))
      throw NumericalError("ddfa_rhs: state left the constraint set (integrator fault)");
    const int m = problem_.m();
    DdfaRhs r;
    const Vector g = problem_.subgradient(s.primal);
    const Vector p =
        stacked_.omega.project(s.primal - g + stacked_.Wbar.transpose() * s.lambda) - s.primal;
    r.dx = p;
    const Vector l_lambda = graph_.neighbor_diff(s.lambda, m);
    r.dlambda = d_ - stacked_.Wbar * s.primal - l_lambda - graph_.neighbor_diff(s.z, m) -
                stacked_.Wbar * p;
    r.dz = l_lambda;
    return r;
  }

  /// y0 = 0 for DPOFA, x0 = P_Omega(0) for DDFA; lambda0 = z0 = 0.
  SolverState default_init(Algorithm alg) const {
    SolverState s;
    s.primal = Vector::Zero(problem_.total_dim());
    if (alg == Algorithm::Ddfa) s.primal = stacked_.omega.project(s.primal);
    s.lambda = Vector::Zero(problem_.n() * problem_.m());
    s.z = Vector::Zero(problem_.n() * problem_.m());
    return s;
  }

 private:
  void check_dims(const SolverState& s) const {
    require(static_cast<int>(s.primal.size()) == problem_.total_dim(),
            "state: primal length mismatch");
    require(static_cast<int>(s.lambda.size()) == problem_.n() * problem_.m(),
            "state: lambda length mismatch");
    require(static_cast<int>(s.z.size()) == problem_.n() * problem_.m(),
            "state: z length mismatch");
  }

  EmoProblem problem_;
  CommGraph graph_;
  StackedForm stacked_;
  Vector d_;
};

struct IntegrateOptions {
  double h = 1e-2;
  double t_end = 100.0;
  double tol = 1e-6;       // stop-rule tolerance on stationarity and feasibility
  int dwell = 100;         // consecutive in-tolerance steps before stopping
  int sample_stride = 10;  // telemetry every this many steps
  bool record_states = false;
  long chatter_window = 10000;  // steps without residual progress before halving h
};

/// Fixed-step forward Euler on the selected algorithm's right-hand side.
/// Stops when both the stationarity residual ||P_Omega(x - g(x) + Wbar'
/// lambda) - x||_inf and the feasibility residual ||W x - d0||_inf stay
/// below tol for `dwell` consecutive steps, or at t_end.
inline Trajectory integrate(const EmoSystem& system, Algorithm alg, SolverState state,
                            const IntegrateOptions& opts) {
  require(opts.h > 0.0, "integrate: h must be > 0");
  require(opts.t_end > 0.0, "integrate: t_end must be > 0");
  require(opts.sample_stride >= 1, "integrate: sample_stride must be >= 1");
  if (alg == Algorithm::Ddfa) {
    require(opts.h <= 1.0, "integrate: DDFA requires h <= 1");
    require(system.stacked().omega.contains(state.primal, 1e-9),
            "integrate: DDFA requires x(0) in Omega");
  }

  const EmoProblem& problem = system.problem();
  const int m = problem.m();
  const Matrix wbar_t = system.stacked().Wbar.transpose();

  Trajectory traj;
  traj.algorithm = alg;
  traj.step = opts.h;
  traj.step_final = opts.h;

  Vector z_mass0 = Vector::Zero(m);
  for (int i = 0; i < problem.n(); ++i) z_mass0 += state.z.segment(i * m, m);

  double h = opts.h;
  int in_tol_streak = 0;
  double best_residual = std::numeric_limits<double>::infinity();
  long steps_since_best = 0;
  bool halved = false;

  auto sample = [&](const SolverState& s, const Vector& x) {
    TrajectorySample ts;
    ts.t = s.t;
    ts.x = x;
    ts.f_value = problem.value(x);
    ts.eq_residual_sq = (system.stacked().W * x - problem.d0()).squaredNorm();
    ts.lambda_norm_sq = s.lambda.squaredNorm();
    ts.z_norm_sq = s.z.squaredNorm();
    traj.samples.push_back(std::move(ts));
    if (opts.record_states) traj.states.push_back(s);
  };

  long k = 0;
  while (true) {
    // Residuals and derivatives at the current state.
    Vector x, dprimal, dlambda, dz;
    double stationarity;
    if (alg == Algorithm::Dpofa) {
      auto r = system.dpofa_rhs(state);
      x = std::move(r.output_x);
      const Vector p = system.stacked().omega.project(x - problem.subgradient(x) +
                                                      wbar_t * state.lambda) -
                       x;
      stationarity = p.lpNorm<Eigen::Infinity>();
      dprimal = std::move(r.dy);
      dlambda = std::move(r.dlambda);
      dz = std::move(r.dz);
    } else {
      auto r = system.ddfa_rhs(state);
      x = state.primal;
      stationarity = r.dx.lpNorm<Eigen::Infinity>();
      dprimal = std::move(r.dx);
      dlambda = std::move(r.dlambda);
      dz = std::move(r.dz);
    }
    const double feasibility =
        (system.stacked().W * x - problem.d0()).lpNorm<Eigen::Infinity>();

    const double violation = std::sqrt(system.stacked().omega.project_info(x).distance_sq);
    traj.max_set_violation = std::max(traj.max_set_violation, violation);
    Vector z_mass = Vector::Zero(m);
    for (int i = 0; i < problem.n(); ++i) z_mass += state.z.segment(i * m, m);
    traj.max_z_drift = std::max(traj.max_z_drift, (z_mass - z_mass0).norm());

    if (k % opts.sample_stride == 0) sample(state, x);

    traj.final_stationarity = stationarity;
    traj.final_feasibility = feasibility;

    const bool in_tol = stationarity <= opts.tol && feasibility <= opts.tol;
    in_tol_streak = in_tol ? in_tol_streak + 1 : 0;
    if (in_tol_streak >= opts.dwell) {
      traj.converged = true;
      break;
    }
    if (state.t >= opts.t_end) break;

    // Chattering guard for nonsmooth objectives: halve h once if the
    // residual has not improved over a long window.
    const double residual = std::max(stationarity, feasibility);
    if (residual < best_residual * (1.0 - 1e-12)) {
      best_residual = residual;
      steps_since_best = 0;
    } else if (!problem.smooth() && !halved && ++steps_since_best >= opts.chatter_window) {
      h *= 0.5;
      halved = true;
      traj.chatter_halvings = 1;
      traj.step_final = h;
      steps_since_best = 0;
    }

    state.primal += h * dprimal;
    state.lambda += h * dlambda;
    state.z += h * dz;
    state.t += h;
    ++k;

    if (!state.primal.allFinite() || !state.lambda.allFinite() || !state.z.allFinite())
      throw NumericalError("integrate: non-finite state at step " + std::to_string(k));
  }

  traj.steps = k;
  // Final telemetry row (skip if the loop exited exactly on a sampled step).
  const Vector x_final = alg == Algorithm::Dpofa ? system.stacked().omega.project(state.primal)
                                                 : state.primal;
  if (traj.samples.empty() || traj.samples.back().t != state.t) sample(state, x_final);
  traj.final_state = std::move(state);
  return traj;
}

}  // namespace emoflow
