#pragma once

#include <Eigen/Core>

namespace hspw {

/// Largest ambient dimension any field or domain may have.
inline constexpr int kMaxDim = 8;

/// Fixed-capacity point type: no heap traffic inside quadrature loops.
template <typename Scalar>
using PointT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

using Point = PointT<double>;

/// Axis-aligned box [lo, hi].
template <typename Scalar>
struct AxisBoxT {
  PointT<Scalar> lo;
  PointT<Scalar> hi;

  int dim() const { return static_cast<int>(lo.size()); }

  Scalar volume() const { return (hi - lo).prod(); }

  bool contains_closed(const PointT<Scalar>& x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }

  bool contains_open(const PointT<Scalar>& x) const {
    return (x.array() > lo.array()).all() && (x.array() < hi.array()).all();
  }
};

using AxisBox = AxisBoxT<double>;

inline Point make_point(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double v : xs) p(i++) = v;
  return p;
}

}  // namespace hspw
