#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hspw/domain.hpp"
#include "hspw/types.hpp"

namespace hspw::detail {

/// Parameter box mapped into a slice of a slab. A zero-dimensional box is a
/// single point.
struct Patch {
  AxisBox params;
  std::function<Point(const Point&)> map;
  std::function<double(const Point&)> jacobian;
};

/// Region on which d(x, dD) equals the coordinate s in [s_begin, s_end].
struct Slab {
  double s_begin = 0.0;
  double s_end = 0.0;
  std::vector<double> breakpoints;  // s-values where slices change shape
  std::function<void(double s, std::vector<Patch>& out)> slice;
};

/// Cuts the domain into slabs; `support` prunes slabs and slices to where the
/// integrand can be nonzero. Generic slabs exist for n <= 3 only.
std::vector<Slab> decompose(const Domain& dom, const std::optional<AxisBox>& support);

}  // namespace hspw::detail
