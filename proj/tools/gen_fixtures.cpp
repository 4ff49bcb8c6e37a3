// Regenerates the committed oracle fixtures for the built-in experiments.
// Usage: gen_fixtures [output-dir]   (default: data/fixtures)

#include <filesystem>
#include <iostream>
#include <string>

#include "emoflow/builtins.hpp"
#include "emoflow/diagnostics.hpp"
#include "emoflow/io.hpp"

namespace {

constexpr int kOracleVersion = 1;
constexpr double kTol = 1e-10;

void emit(const std::string& dir, const std::string& name, const emoflow::EmoProblem& problem) {
  const auto sol = emoflow::centralized_oracle(problem, kTol);
  emoflow::Fixture f;
  f.problem_hash = emoflow::problem_hash_hex(problem);
  f.tol = kTol;
  f.oracle_version = kOracleVersion;
  f.x_star = sol.x_star;
  f.lambda_bar = sol.lambda_bar;
  const std::string path = dir + "/" + name + ".fix";
  emoflow::write_fixture(path, f);
  std::cout << name << ": kkt residual " << sol.kkt_residual << " -> " << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "data/fixtures";
  std::filesystem::create_directories(dir);
  try {
    emit(dir, "nonsmooth10", emoflow::builtin_nonsmooth10().problem);
    emit(dir, "netflow6x12", emoflow::builtin_netflow6x12().problem);
    emit(dir, "minnorm_seed42", emoflow::builtin_minnorm(42).problem);
  } catch (const std::exception& e) {
    std::cerr << "fixture generation failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
