#pragma once

#include <queue>
#include <tuple>
#include <utility>
#include <vector>

#include "emoflow/types.hpp"

namespace emoflow {

/// Weighted undirected communication graph over n agents.
/// Adjacency must be exactly symmetric with zero diagonal and
/// nonnegative weights.
class CommGraph {
 public:
  CommGraph(int n, Matrix adjacency) : n_(n), adj_(std::move(adjacency)) {
    require(n_ >= 1, "graph: need at least one node");
    require(adj_.rows() == n_ && adj_.cols() == n_, "graph: adjacency must be n x n");
    for (int i = 0; i < n_; ++i) {
      require(adj_(i, i) == 0.0, "graph: diagonal must be zero");
      for (int j = 0; j < n_; ++j) {
        require(adj_(i, j) >= 0.0, "graph: negative weight");
        require(adj_(i, j) == adj_(j, i), "graph: adjacency not symmetric");
      }
    }
  }

  static CommGraph ring(int n, double weight = 1.0) {
    Matrix a = Matrix::Zero(n, n);
    if (n == 2) {
      a(0, 1) = a(1, 0) = weight;
    } else if (n > 2) {
      for (int i = 0; i < n; ++i) {
        int j = (i + 1) % n;
        a(i, j) = a(j, i) = weight;
      }
    }
    return CommGraph(n, std::move(a));
  }

  static CommGraph complete(int n, double weight = 1.0) {
    Matrix a = Matrix::Constant(n, n, weight);
    a.diagonal().setZero();
    return CommGraph(n, std::move(a));
  }

  /// Edge list {i, j, w} with 0-based node indices.
  static CommGraph from_edges(int n, const std::vector<std::tuple<int, int, double>>& edges) {
    Matrix a = Matrix::Zero(n, n);
    for (const auto& [i, j, w] : edges) {
      require(i >= 0 && i < n && j >= 0 && j < n && i != j, "graph: bad edge");
      a(i, j) = a(j, i) = w;
    }
    return CommGraph(n, std::move(a));
  }

  int n() const { return n_; }
  const Matrix& adjacency() const { return adj_; }

  /// L_n = D - A with D = diag(row sums of A). Rows and columns sum to zero.
  Matrix laplacian() const {
    Matrix l = -adj_;
    l.diagonal() = adj_.rowwise().sum();
    return l;
  }

  /// L = L_n (x) I_m acting on stacked per-agent vectors.
  Matrix stacked_laplacian(int m) const {
    Matrix ln = laplacian();
    Matrix l = Matrix::Zero(n_ * m, n_ * m);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        l.block(i * m, j * m, m, m) = ln(i, j) * Matrix::Identity(m, m);
    return l;
  }

  bool is_connected() const {
    std::vector<bool> seen(n_, false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    int count = 1;
    while (!q.empty()) {
      int i = q.front();
      q.pop();
      for (int j = 0; j < n_; ++j) {
        if (adj_(i, j) > 0.0 && !seen[j]) {
          seen[j] = true;
          ++count;
          q.push(j);
        }
      }
    }
    return count == n_;
  }

  /// out_i = sum_j a_ij (v_i - v_j) for stacked v with blocks of size m.
  /// Equals (L_n (x) I_m) v.
  Vector neighbor_diff(const Vector& stacked, int m) const {
    require(static_cast<int>(stacked.size()) == n_ * m,
            "neighbor_diff: expected length n*m = " + std::to_string(n_ * m));
    Vector out = Vector::Zero(n_ * m);
    for (int i = 0; i < n_; ++i) {
      auto vi = stacked.segment(i * m, m);
      for (int j = 0; j < n_; ++j) {
        const double a = adj_(i, j);
        if (a > 0.0) out.segment(i * m, m) += a * (vi - stacked.segment(j * m, m));
      }
    }
    return out;
  }

 private:
  int n_;
  Matrix adj_;
};

}  // namespace emoflow
