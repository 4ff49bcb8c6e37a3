#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "emoflow/types.hpp"

namespace emoflow {

struct ProjectionResult {
  Vector point;
  double distance_sq = 0.0;
};

/// Closed convex set with an exact (closed-form) Euclidean projection.
/// Supported variants: full space, interval, box, ball, and Cartesian
/// products of these. Projection onto a product is factorwise.
class ConvexSet {
 public:
  static ConvexSet full_space(int dim) {
    require(dim >= 1, "full_space: dim must be >= 1");
    return ConvexSet(FullSpace{dim});
  }

  static ConvexSet interval(double lo, double hi) {
    require(lo <= hi, "interval: lo > hi");
    return ConvexSet(Interval{lo, hi});
  }

  static ConvexSet box(Vector lo, Vector hi) {
    require(lo.size() == hi.size(), "box: lo/hi size mismatch");
    require(lo.size() >= 1, "box: empty bounds");
    for (Eigen::Index j = 0; j < lo.size(); ++j)
      require(lo[j] <= hi[j], "box: lo > hi at component " + std::to_string(j));
    return ConvexSet(Box{std::move(lo), std::move(hi)});
  }

  static ConvexSet ball(Vector center, double radius) {
    require(radius > 0.0, "ball: radius must be > 0");
    require(center.size() >= 1, "ball: empty center");
    return ConvexSet(Ball{std::move(center), radius});
  }

  static ConvexSet product(std::vector<ConvexSet> factors) {
    require(!factors.empty(), "product: no factors");
    if (factors.size() == 1) return std::move(factors.front());
    int dim = 0;
    for (const auto& f : factors) dim += f.dim();
    return ConvexSet(Product{std::move(factors), dim});
  }

  int dim() const {
    return std::visit(
        [](const auto& s) -> int {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, FullSpace>) return s.dim;
          else if constexpr (std::is_same_v<T, Interval>) return 1;
          else if constexpr (std::is_same_v<T, Box>) return static_cast<int>(s.lo.size());
          else if constexpr (std::is_same_v<T, Ball>) return static_cast<int>(s.center.size());
          else return s.dim;
        },
        v_);
  }

  bool is_full_space() const {
    if (std::holds_alternative<FullSpace>(v_)) return true;
    if (const auto* p = std::get_if<Product>(&v_)) {
      for (const auto& f : p->factors)
        if (!f.is_full_space()) return false;
      return true;
    }
    return false;
  }

  Vector project(const Vector& u) const {
    require(static_cast<int>(u.size()) == dim(),
            "project: dimension mismatch (got " + std::to_string(u.size()) +
                ", set has " + std::to_string(dim()) + ")");
    return std::visit(
        [&](const auto& s) -> Vector {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, FullSpace>) {
            return u;
          } else if constexpr (std::is_same_v<T, Interval>) {
            Vector r(1);
            r[0] = std::clamp(u[0], s.lo, s.hi);
            return r;
          } else if constexpr (std::is_same_v<T, Box>) {
            return u.cwiseMax(s.lo).cwiseMin(s.hi);
          } else if constexpr (std::is_same_v<T, Ball>) {
            Vector diff = u - s.center;
            double nrm = diff.norm();
            if (nrm <= s.radius) return u;
            return s.center + (s.radius / nrm) * diff;
          } else {
            Vector r(s.dim);
            Eigen::Index off = 0;
            for (const auto& f : s.factors) {
              const int d = f.dim();
              r.segment(off, d) = f.project(u.segment(off, d));
              off += d;
            }
            return r;
          }
        },
        v_);
  }

  ProjectionResult project_info(const Vector& u) const {
    ProjectionResult r;
    r.point = project(u);
    r.distance_sq = (u - r.point).squaredNorm();
    return r;
  }

  bool contains(const Vector& u, double tol = 1e-12) const {
    return (u - project(u)).lpNorm<Eigen::Infinity>() <= tol;
  }

  /// Merit function V(x) = 1/2 (||x - P(y_ref)||^2 - ||x - P(x)||^2).
  /// Differentiable in x with gradient P(x) - P(y_ref), and bounded below
  /// by 1/2 ||P(x) - P(y_ref)||^2.
  double merit(const Vector& x, const Vector& y_ref) const {
    require(static_cast<int>(x.size()) == dim() &&
                static_cast<int>(y_ref.size()) == dim(),
            "merit: dimension mismatch");
    const Vector py = project(y_ref);
    const Vector px = project(x);
    return 0.5 * ((x - py).squaredNorm() - (x - px).squaredNorm());
  }

  /// Componentwise bounds [lo, hi] when the set is an axis-aligned box
  /// (interval/box/full-space and their products); nullopt for balls.
  struct Bounds {
    Vector lo, hi;
  };
  std::optional<Bounds> box_bounds() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return std::visit(
        [&](const auto& s) -> std::optional<Bounds> {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, FullSpace>) {
            return Bounds{Vector::Constant(s.dim, -inf), Vector::Constant(s.dim, inf)};
          } else if constexpr (std::is_same_v<T, Interval>) {
            Vector lo(1), hi(1);
            lo[0] = s.lo;
            hi[0] = s.hi;
            return Bounds{lo, hi};
          } else if constexpr (std::is_same_v<T, Box>) {
            return Bounds{s.lo, s.hi};
          } else if constexpr (std::is_same_v<T, Ball>) {
            if (s.center.size() == 1) {
              Vector lo(1), hi(1);
              lo[0] = s.center[0] - s.radius;
              hi[0] = s.center[0] + s.radius;
              return Bounds{lo, hi};
            }
            return std::nullopt;
          } else {
            Bounds b{Vector(s.dim), Vector(s.dim)};
            Eigen::Index off = 0;
            for (const auto& f : s.factors) {
              auto fb = f.box_bounds();
              if (!fb) return std::nullopt;
              b.lo.segment(off, f.dim()) = fb->lo;
              b.hi.segment(off, f.dim()) = fb->hi;
              off += f.dim();
            }
            return b;
          }
        },
        v_);
  }

 private:
  struct FullSpace {
    int dim;
  };
  struct Interval {
    double lo, hi;
  };
  struct Box {
    Vector lo, hi;
  };
  struct Ball {
    Vector center;
    double radius;
  };
  struct Product {
    std::vector<ConvexSet> factors;
    int dim;
  };
  using Variant = std::variant<FullSpace, Interval, Box, Ball, Product>;

  explicit ConvexSet(Variant v) : v_(std::move(v)) {}

  Variant v_;
};

}  // namespace emoflow
