// Acceptance suite: end-to-end checks of both algorithms against the
// committed oracle fixtures and the structural invariants. Prints one
// PASS/FAIL line per criterion and exits nonzero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "emoflow/builtins.hpp"
#include "emoflow/diagnostics.hpp"
#include "emoflow/dynamics.hpp"
#include "emoflow/runner.hpp"

using namespace emoflow;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %s%s%s\n", pass ? "PASS" : "FAIL", name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!pass) ++failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

struct RunOutcome {
  Trajectory traj;
  double wall_seconds;
};

RunOutcome run(const EmoSystem& sys, Algorithm alg, double h, double t_end, double tol,
               bool record_states = true) {
  IntegrateOptions opts;
  opts.h = h;
  opts.t_end = t_end;
  opts.tol = tol;
  opts.record_states = record_states;
  opts.sample_stride = 10;
  const auto t0 = std::chrono::steady_clock::now();
  Trajectory traj = integrate(sys, alg, sys.default_init(alg), opts);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return RunOutcome{std::move(traj), secs};
}

// Criterion: reproduction of a builtin experiment against its fixture.
void check_reproduction(const std::string& label, const BuiltinInstance& instance, double h,
                        double t_end, double feas_sq_tol, double stat_tol, double gap_tol,
                        std::vector<std::pair<Algorithm, Trajectory>>* collected) {
  EmoSystem sys(instance.problem, instance.graph);
  const auto fixture = find_fixture(instance.problem);
  if (!fixture) {
    report(label, false, "missing oracle fixture");
    return;
  }
  for (Algorithm alg : {Algorithm::Dpofa, Algorithm::Ddfa}) {
    auto out = run(sys, alg, h, t_end, 1e-7);
    const Vector x = out.traj.samples.back().x;
    const double feas_sq = (sys.stacked().W * x - sys.problem().d0()).squaredNorm();
    const double stat = out.traj.final_stationarity;
    const double gap = (x - fixture->x_star).lpNorm<Eigen::Infinity>();
    const bool pass = feas_sq <= feas_sq_tol && stat <= stat_tol && gap <= gap_tol &&
                      out.wall_seconds < 5.0;
    report(label + " [" + algorithm_name(alg) + "]", pass,
           "feas_sq=" + fmt(feas_sq) + " stat=" + fmt(stat) + " gap=" + fmt(gap) + " time=" +
               fmt(out.wall_seconds) + "s");
    if (collected) collected->emplace_back(alg, std::move(out.traj));
  }
}

// Seeded random box-constrained instance with a strictly interior
// feasible point, so the Slater condition holds by construction.
BuiltinInstance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_dist(2, 6), q_dist(1, 3), m_dist(1, 2);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int n = n_dist(rng), m = m_dist(rng);
  std::vector<int> dims(n);
  int total = 0;
  for (int i = 0; i < n; ++i) {
    dims[i] = q_dist(rng);
    total += dims[i];
  }
  Vector interior(total);
  std::vector<Matrix> blocks(n);
  Vector d0 = Vector::Zero(m);
  int off = 0;
  for (int i = 0; i < n; ++i) {
    blocks[i] = Matrix(m, dims[i]);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < dims[i]; ++c) blocks[i](r, c) = unif(rng);
    for (int c = 0; c < dims[i]; ++c) interior[off + c] = 0.5 * unif(rng);
    d0 += blocks[i] * interior.segment(off, dims[i]);
    off += dims[i];
  }
  const auto shares = split_supply(d0, n);
  std::vector<AgentProblem> agents;
  off = 0;
  for (int i = 0; i < n; ++i) {
    Vector curv(dims[i]), center(dims[i]);
    for (int c = 0; c < dims[i]; ++c) {
      curv[c] = 0.5 + std::uniform_real_distribution<double>(0.0, 2.0)(rng);
      center[c] = unif(rng);
    }
    agents.push_back(AgentProblem{
        objectives::diagonal_quadratic(std::move(curv), std::move(center)),
        ConvexSet::box(Vector::Constant(dims[i], -1.0), Vector::Constant(dims[i], 1.0)),
        blocks[i], shares[i], dims[i]});
    off += dims[i];
  }
  return BuiltinInstance{EmoProblem(std::move(agents), m, d0), CommGraph::ring(n)};
}

double max_rhs_norm(const EmoSystem& sys, Algorithm alg, const Equilibrium& eq) {
  SolverState s;
  s.primal = alg == Algorithm::Dpofa ? *eq.y_star : eq.x_star;
  s.lambda = eq.lambda_star;
  s.z = eq.z_star;
  if (alg == Algorithm::Dpofa) {
    const auto r = sys.dpofa_rhs(s);
    return std::max({r.dy.lpNorm<Eigen::Infinity>(), r.dlambda.lpNorm<Eigen::Infinity>(),
                     r.dz.lpNorm<Eigen::Infinity>()});
  }
  const auto r = sys.ddfa_rhs(s);
  return std::max({r.dx.lpNorm<Eigen::Infinity>(), r.dlambda.lpNorm<Eigen::Infinity>(),
                   r.dz.lpNorm<Eigen::Infinity>()});
}

}  // namespace

int main() {
  std::vector<std::pair<Algorithm, Trajectory>> ns10_runs, netflow_runs;

  // --- Ten-agent nonsmooth reproduction ---------------------------------
  check_reproduction("nonsmooth10 reproduction", builtin_nonsmooth10(), 1e-2, 100.0, 1e-6,
                     1e-4, 1e-3, &ns10_runs);

  // --- Network-flow reproduction ----------------------------------------
  {
    const auto instance = builtin_netflow6x12();
    check_reproduction("netflow6x12 reproduction", instance, 1e-2, 300.0, 1e-6, 1e-4, 1e-3,
                       &netflow_runs);
    // Flows stay within capacity at every sampled step.
    bool in_box = true;
    for (const auto& [alg, traj] : netflow_runs) {
      if (traj.max_set_violation > 1e-10) in_box = false;
      for (const auto& s : traj.samples)
        for (int j = 0; j < s.x.size(); ++j)
          if (s.x[j] < -1e-10 || s.x[j] > 10.0 + 1e-10) in_box = false;
    }
    report("netflow6x12 capacity bounds", in_box, "");
  }

  // --- Min-norm special case against the closed form --------------------
  {
    const auto instance = builtin_minnorm(42);
    EmoSystem sys(instance.problem, instance.graph);
    const Matrix w = sys.stacked().W;
    const Vector least_norm =
        w.transpose() * (w * w.transpose()).llt().solve(instance.problem.d0());
    auto out = run(sys, Algorithm::Ddfa, 1e-2, 300.0, 1e-8);
    const double gap =
        (out.traj.samples.back().x - least_norm).lpNorm<Eigen::Infinity>();
    report("min-norm closed form (ddfa)", gap <= 1e-4, "gap=" + fmt(gap));
  }

  // --- Equilibrium round-trip on seeded random instances -----------------
  {
    std::mt19937_64 rng(20240817);
    double worst_rhs = 0.0, worst_kkt = 0.0;
    bool ok = true;
    for (int trial = 0; trial < 20; ++trial) {
      const auto instance = random_instance(rng);
      EmoSystem sys(instance.problem, instance.graph);
      try {
        const auto sol = centralized_oracle(sys.problem(), 1e-10);
        for (Algorithm alg : {Algorithm::Dpofa, Algorithm::Ddfa}) {
          const auto eq = build_equilibrium(sys, sol.x_star, sol.lambda_bar, alg);
          worst_rhs = std::max(worst_rhs, max_rhs_norm(sys, alg, eq));
        }
        // Converse direction: the run's own limit satisfies the
        // optimality conditions.
        auto out = run(sys, Algorithm::Ddfa, 1e-2, 400.0, 1e-7, false);
        const auto rep = kkt_residual(sys.problem(), sys.stacked(), sys.graph(),
                                      out.traj.samples.back().x, out.traj.final_state.lambda);
        worst_kkt = std::max(worst_kkt, std::max(rep.stationarity, rep.feasibility));
      } catch (const std::exception& e) {
        ok = false;
        std::printf("  trial %d failed: %s\n", trial, e.what());
      }
    }
    report("equilibrium round-trip (20 seeded instances)",
           ok && worst_rhs <= 1e-8 && worst_kkt <= 1e-5,
           "max_rhs=" + fmt(worst_rhs) + " max_kkt=" + fmt(worst_kkt));
  }

  // --- Lyapunov monotonicity at h = 1e-3 ---------------------------------
  {
    int violations = 0;
    int runs = 0;
    auto check_monotone = [&](const BuiltinInstance& instance, double t_end) {
      EmoSystem sys(instance.problem, instance.graph);
      const auto sol = centralized_oracle(sys.problem(), 1e-10);
      for (Algorithm alg : {Algorithm::Dpofa, Algorithm::Ddfa}) {
        const auto eq = build_equilibrium(sys, sol.x_star, sol.lambda_bar, alg);
        auto out = run(sys, alg, 1e-3, t_end, 1e-7);
        ++runs;
        double prev = std::numeric_limits<double>::infinity();
        for (const auto& state : out.traj.states) {
          const double v = alg == Algorithm::Dpofa ? lyapunov_dpofa(sys, state, eq)
                                                   : lyapunov_ddfa(sys, state, eq);
          if (v > prev + 1e-6) ++violations;
          prev = v;
        }
      }
    };
    check_monotone(builtin_nonsmooth10(), 100.0);
    check_monotone(builtin_netflow6x12(), 200.0);
    report("lyapunov monotonicity (h=1e-3)", violations == 0,
           std::to_string(violations) + " violations over " + std::to_string(runs) + " runs");
  }

  // --- Feasibility invariants over the reproduction runs -----------------
  {
    bool ok = true;
    double worst_violation = 0.0, worst_drift = 0.0;
    for (const auto* runs : {&ns10_runs, &netflow_runs}) {
      for (const auto& [alg, traj] : *runs) {
        worst_violation = std::max(worst_violation, traj.max_set_violation);
        worst_drift = std::max(worst_drift, traj.max_z_drift);
      }
    }
    ok = worst_violation <= 1e-10 && worst_drift <= 1e-8;
    report("feasibility invariants (x in Omega, z mass)", ok,
           "max_violation=" + fmt(worst_violation) + " max_z_drift=" + fmt(worst_drift));
  }

  // --- Projection property suite -----------------------------------------
  {
    std::mt19937_64 rng(7777);
    std::uniform_real_distribution<double> unif(-4.0, 4.0);
    std::vector<ConvexSet> sets;
    sets.push_back(ConvexSet::full_space(2));
    sets.push_back(ConvexSet::interval(-1.0, 2.0));
    Vector lo(3), hi(3);
    lo << -1, 0, -2;
    hi << 1, 0.5, 2;
    sets.push_back(ConvexSet::box(lo, hi));
    Vector c(2);
    c << 0.5, -0.5;
    sets.push_back(ConvexSet::ball(c, 1.5));
    sets.push_back(ConvexSet::product({ConvexSet::interval(0, 1), ConvexSet::ball(c, 1.0)}));
    long violations = 0;
    const int checks_per_kind = 10000;
    for (int k = 0; k < checks_per_kind; ++k) {
      const auto& set = sets[k % sets.size()];
      Vector u(set.dim()), y(set.dim());
      for (int j = 0; j < set.dim(); ++j) {
        u[j] = unif(rng);
        y[j] = unif(rng);
      }
      const Vector pu = set.project(u);
      const Vector py = set.project(y);
      if ((set.project(pu) - pu).lpNorm<Eigen::Infinity>() > 1e-10) ++violations;
      if ((u - pu).dot(py - pu) > 1e-10) ++violations;
      if ((pu - py).dot(u - y) < (pu - py).squaredNorm() - 1e-10) ++violations;
    }
    report("projection property suite (3x10^4 checks)", violations == 0,
           std::to_string(violations) + " violations");
  }

  // --- Boundedness: no late blow-up ---------------------------------------
  {
    bool ok = true;
    for (const auto* runs : {&ns10_runs, &netflow_runs}) {
      for (const auto& [alg, traj] : *runs) {
        if (!traj.converged || traj.states.empty()) {
          ok = false;
          continue;
        }
        const double t_ref = traj.states.back().t / 10.0;
        double ref_primal = 0, ref_lambda = 0, ref_z = 0;
        double max_primal = 0, max_lambda = 0, max_z = 0;
        for (const auto& s : traj.states) {
          max_primal = std::max(max_primal, s.primal.norm());
          max_lambda = std::max(max_lambda, s.lambda.norm());
          max_z = std::max(max_z, s.z.norm());
          if (s.t <= t_ref) {
            ref_primal = s.primal.norm();
            ref_lambda = s.lambda.norm();
            ref_z = s.z.norm();
          }
        }
        if (!(std::isfinite(max_primal) && max_primal <= 10.0 * std::max(ref_primal, 1e-12) &&
              max_lambda <= 10.0 * std::max(ref_lambda, 1e-12) &&
              max_z <= 10.0 * std::max(ref_z, 1e-12)))
          ok = false;
      }
    }
    report("boundedness (no late blow-up)", ok, "");
  }

  std::printf("%s: %d criterion failure(s)\n", failures == 0 ? "ACCEPTANCE OK" : "ACCEPTANCE FAILED",
              failures);
  return failures == 0 ? 0 : 1;
}
