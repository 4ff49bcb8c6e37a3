#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace emoflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Invalid problem data, mismatched dimensions, bad config values.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Integration blow-up, oracle non-convergence and similar runtime faults.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace emoflow
