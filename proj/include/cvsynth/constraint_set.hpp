#pragma once

#include <cstddef>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cvsynth/numerics.hpp"

namespace cvsynth {

/// Boundary point of a constraint set together with its active constraints and
/// the unit generators of the normal cone there.
struct ConeQuery {
  Vector point;
  std::vector<int> active;
  std::vector<Vector> normals;

  /// Interior-tangent margin of a direction: -max_i <n_i, v>. Positive iff v
  /// points strictly inside every active constraint. +inf with no active
  /// constraint (interior point).
  double margin(const Vector& v) const;
};

/// Compact constraint set with nonempty interior.
class ConstraintSet {
 public:
  struct Ball {
    Vector center;
    double radius;
  };
  struct Box {
    Vector lower;
    Vector upper;
  };
  /// {x : <a_i, x> <= c_i}, rows a_i normalized to unit length.
  struct Polytope {
    Matrix normals;
    Vector offsets;
  };
  /// {x : sum_i |(x_i - c_i) / r_i|^p <= 1}, p >= 2.
  struct Superellipse {
    Vector center;
    Vector semi_axes;
    double exponent;
  };
  using Shape = std::variant<Ball, Box, Polytope, Superellipse>;

  /// Placeholder with dimension 0; use the factories for real sets.
  ConstraintSet() = default;

  static ConstraintSet ball(Vector center, double radius);
  static ConstraintSet box(Vector lower, Vector upper);
  static ConstraintSet polytope(Matrix normals, Vector offsets);
  static ConstraintSet superellipse(Vector center, Vector semi_axes, double exponent);

  const Shape& shape() const { return shape_; }
  std::string_view variant_name() const;
  Eigen::Index dim() const { return witness_.size(); }

  /// Signed margin: positive in the interior, zero on the boundary, negative
  /// outside. Exact distance for balls, boxes (inside) and unit-row polytopes.
  double margin(const Vector& x) const;
  bool contains(const Vector& x, double tol = 0.0) const { return margin(x) >= -tol; }

  ConeQuery cone_at(const Vector& x) const;

  /// Deterministic quasi-uniform sample of the boundary. `density` is the
  /// number of directions for round sets and the points per face axis for
  /// boxes and polygon edges.
  std::vector<ConeQuery> sample_boundary(std::size_t density) const;

  const Vector& interior_witness() const { return witness_; }
  double bounding_radius() const { return radius_; }
  const Vector& box_lower() const { return box_lo_; }
  const Vector& box_upper() const { return box_hi_; }
  double tol_active() const { return 1e-9 * radius_; }
  /// Polytope vertices (empty for other variants).
  const std::vector<Vector>& vertices() const { return vertices_; }

 private:
  void finalize();

  Shape shape_;
  Vector witness_;
  double radius_ = 0.0;
  Vector box_lo_;
  Vector box_hi_;
  std::vector<Vector> vertices_;
};

/// Deterministic unit directions in R^n (circle lattice, Fibonacci sphere, or
/// normalized cube-surface grid for n >= 4).
std::vector<Vector> sphere_directions(Eigen::Index n, std::size_t count);

}  // namespace cvsynth
