#pragma once

// Proper subdomains D of R^n with exact distance to the boundary.
//
// Naming note: "d" is used twice in the underlying mathematics, once for the
// distance d(x, dD) and once for the number of unconstrained coordinates of
// the half-space product R^d x R^r_+. Here the distance is always
// `distance_to_boundary` and the split is `HalfSpaceProduct::free_dims` /
// `HalfSpaceProduct::positive_dims`.

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "hspw/types.hpp"

namespace hspw {

struct Interval {
  double lo;
  double hi;
};

struct Box {
  AxisBox extent;
};

struct Ball {
  Point center;
  double radius;
};

/// Face {x : normal . x = offset} of the polytope {x : normal . x < offset}.
struct Face {
  Point normal;  // unit, outward
  double offset;
};

struct ConvexPolytope {
  std::vector<Face> faces;
};

/// R^d x R^r_+ (the last r coordinates are positive). The truncation box only
/// bounds quadrature; its faces are not part of the boundary.
struct HalfSpaceProduct {
  int free_dims;
  int positive_dims;
  AxisBox truncation;
};

using DomainShape = std::variant<Interval, Box, Ball, ConvexPolytope, HalfSpaceProduct>;

class Domain {
 public:
  /// Validates the shape; polytope normals are normalized on the way in.
  explicit Domain(DomainShape shape);

  static Domain interval(double lo, double hi);
  static Domain box(Point lo, Point hi);
  static Domain ball(Point center, double radius);
  static Domain polytope(std::vector<Face> faces);
  static Domain halfspace_product(int free_dims, int positive_dims, AxisBox truncation);

  int dim() const { return dim_; }
  const DomainShape& shape() const { return shape_; }
  std::string kind() const;

  /// Smallest axis-aligned box containing the domain (the truncation box for
  /// a half-space product).
  const AxisBox& bounding_box() const { return bbox_; }

  /// A point well inside the domain (center, centroid of vertices, ...).
  const Point& interior_point() const { return interior_; }

 private:
  DomainShape shape_;
  int dim_ = 0;
  AxisBox bbox_;
  Point interior_;
};

bool contains(const Domain& dom, const Point& x);

/// Exact d(x, dD) for interior x; throws PointOutsideDomain otherwise.
double distance_to_boundary(const Domain& dom, const Point& x);

/// Gradient of the distance function where it is differentiable: the inward
/// unit normal of the nearest boundary piece (first one on ties; zero at a
/// ball's center).
Point distance_gradient(const Domain& dom, const Point& x);

inline AxisBox bounding_box(const Domain& dom) { return dom.bounding_box(); }

/// Vertices of {z : A z <= b} by brute force over n-subsets of constraints.
std::vector<Eigen::VectorXd> enumerate_vertices(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                                double tol = 1e-10);

}  // namespace hspw
