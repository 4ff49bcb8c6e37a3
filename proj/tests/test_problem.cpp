#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "emoflow/builtins.hpp"
#include "emoflow/problem.hpp"

using namespace emoflow;

namespace {

AgentProblem scalar_agent(Matrix w, Vector supply) {
  return AgentProblem{objectives::quad_abs(), ConvexSet::interval(-1, 1), std::move(w),
                      std::move(supply), 1};
}

}  // namespace

TEST_CASE("stack smallest concatenation") {
  Matrix w1(1, 1), w2(1, 1);
  w1 << 1.0;
  w2 << 1.0;
  Vector d0(1);
  d0 << 0.0;
  EmoProblem p({scalar_agent(w1, Vector::Zero(1)), scalar_agent(w2, Vector::Zero(1))}, 1, d0);
  const auto s = stack(p);
  CHECK(s.W.rows() == 1);
  CHECK(s.W.cols() == 2);
  CHECK(s.W(0, 0) == 1.0);
  CHECK(s.W(0, 1) == 1.0);
  CHECK(s.Wbar.rows() == 2);
  CHECK(s.Wbar(0, 0) == 1.0);
  CHECK(s.Wbar(0, 1) == 0.0);
  CHECK(s.Wbar(1, 0) == 0.0);
  CHECK(s.Wbar(1, 1) == 1.0);
  CHECK(s.omega.dim() == 2);
}

TEST_CASE("stack single agent is identity") {
  Matrix w(2, 3);
  w << 1, 2, 3, 4, 5, 6;
  Vector d0(2);
  d0 << 1, 1;
  AgentProblem a{objectives::sum_squares(), ConvexSet::full_space(3), w, d0, 3};
  EmoProblem p({a}, 2, d0);
  const auto s = stack(p);
  CHECK(s.W == w);
  CHECK(s.Wbar == w);
}

TEST_CASE("stack reproduces the ten-agent constraint matrix") {
  const auto b = builtin_nonsmooth10();
  const auto s = stack(b.problem);
  Matrix a(2, 10);
  a << 1, 1, 1, 0, 0, 1, 1, 1, 0, 0,
       1, 0, 0, 1, 1, 1, 0, 0, 1, 1;
  CHECK(s.W == a);
  // Agent 4 (1-based) holds column [0, 1]'.
  CHECK(b.problem.agent(3).w_block(0, 0) == 0.0);
  CHECK(b.problem.agent(3).w_block(1, 0) == 1.0);
  // Block extraction round-trips each W_i.
  for (int i = 0; i < b.problem.n(); ++i)
    CHECK(s.W.middleCols(b.problem.offset(i), b.problem.agent(i).dim) ==
          b.problem.agent(i).w_block);
}

TEST_CASE("stack dimension errors name the agent") {
  Matrix w_bad(2, 2);  // m=1 expected
  w_bad.setZero();
  Vector d0(1);
  d0 << 0.0;
  AgentProblem bad{objectives::sum_squares(), ConvexSet::full_space(1), w_bad, Vector::Zero(1), 1};
  CHECK_THROWS_WITH(EmoProblem({bad}, 1, d0), Catch::Matchers::ContainsSubstring("agent 0"));
}

TEST_CASE("split_supply") {
  SECTION("uniform matches the paper data") {
    Vector d0(2);
    d0 << 3.0, 2.0;
    const auto parts = split_supply(d0, 10);
    REQUIRE(parts.size() == 10);
    for (const auto& p : parts) {
      CHECK(p[0] == Catch::Approx(0.3).margin(1e-15));
      CHECK(p[1] == Catch::Approx(0.2).margin(1e-15));
    }
  }
  SECTION("zero case") {
    Vector d0(1);
    d0 << 0.0;
    for (const auto& p : split_supply(d0, 3)) CHECK(p[0] == 0.0);
  }
  SECTION("explicit weights") {
    Vector d0(1), w(2);
    d0 << 1.0;
    w << 0.25, 0.75;
    const auto parts = split_supply(d0, 2, w);
    CHECK(parts[0][0] == 0.25);
    CHECK(parts[1][0] == 0.75);
  }
  SECTION("weights must sum to one") {
    Vector d0(1), w(2);
    d0 << 1.0;
    w << 0.25, 0.5;
    CHECK_THROWS_AS(split_supply(d0, 2, w), ValidationError);
  }
  SECTION("parts sum to d0 exactly") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-10, 10);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 12);
      Vector d0(3);
      for (int j = 0; j < 3; ++j) d0[j] = unif(rng);
      Vector w(n);
      for (int i = 0; i < n; ++i) w[i] = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
      w /= w.sum();
      Vector sum = Vector::Zero(3);
      for (const auto& p : split_supply(d0, n, w)) sum += p;
      CHECK((sum - d0).lpNorm<Eigen::Infinity>() == 0.0);
    }
  }
}

TEST_CASE("objective oracle convexity probe") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(-2, 2);
  const auto obj = objectives::quad_abs();
  for (int k = 0; k < 1000; ++k) {
    Vector x(1), y(1);
    x[0] = unif(rng);
    y[0] = unif(rng);
    const double gap = obj.value(y) - obj.value(x) - obj.subgradient(x).dot(y - x);
    CHECK(gap >= -1e-9);
    if (std::abs(x[0] - y[0]) > 1e-9)
      CHECK((obj.subgradient(x) - obj.subgradient(y)).dot(x - y) > 0.0);
  }
  // Minimal-norm selection at the kink.
  CHECK(obj.subgradient(Vector::Zero(1))[0] == 0.0);
}

TEST_CASE("validate") {
  const auto b = builtin_nonsmooth10();
  SECTION("ring graph passes") {
    CHECK(validate(b.problem, b.graph).ok());
  }
  SECTION("disconnected graph fails connectivity") {
    Matrix a = Matrix::Zero(10, 10);
    a(0, 1) = a(1, 0) = 1.0;  // two components
    const auto report = validate(b.problem, CommGraph(10, a));
    CHECK_FALSE(report.ok());
    bool found = false;
    for (const auto& c : report.checks)
      if (c.name == "graph_connected") found = !c.pass;
    CHECK(found);
  }
  SECTION("supplies must sum to d0") {
    Matrix w(1, 1);
    w << 1.0;
    Vector d0(1);
    d0 << 2.0;
    AgentProblem a{objectives::sum_squares(), ConvexSet::full_space(1), w, Vector::Ones(1), 1};
    CHECK_THROWS_AS(EmoProblem({a}, 1, d0), ValidationError);
  }
}
