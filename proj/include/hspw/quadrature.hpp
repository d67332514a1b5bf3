#pragma once

// Integration against mu_alpha(dx) = dx / d(x, dD)^alpha.
//
// The domain is cut into slabs on which the distance to the boundary is a
// coordinate s (one slab per face for boxes and polytopes, the radial
// coordinate for balls). Along s the integrand is resolved by geometric cells
// s in [S r^{k+1}, S r^k] whose partial sums are extrapolated with Wynn's
// epsilon algorithm; away from the boundary and across each slice a tensor
// Gauss-Legendre rule is refined by bisection.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "hspw/domain.hpp"
#include "hspw/types.hpp"

namespace hspw {

struct QuadratureConfig {
  int base_order = 8;            // Gauss points per cell per axis
  double grading_ratio = 0.5;    // geometric cell ratio toward the boundary
  int max_depth = 0;             // graded levels; 0 selects 24 / 12 / 8 for n = 1 / 2 / 3
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  double divergence_growth_threshold = 1.25;
  int divergence_window = 5;     // levels the growth must be sustained over
  int max_bisections = 40;       // per-cell bisection cap away from the boundary

  void validate() const;
  int depth_for(int dim) const;
};

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::int64_t cells_used = 0;
  bool converged = false;
  bool divergent_flag = false;
};

/// Anything that can be evaluated on the open interior of a domain.
struct Integrand {
  std::function<double(const Point&)> eval;
  std::optional<AxisBox> support;            // identically zero outside
  std::vector<double> distance_breakpoints;  // values of d where the integrand has kinks
  bool indicator = false;                    // values in {0, 1}
};

/// int_D f(x) d(x)^{-alpha} dx with alpha < n.
IntegralResult integrate_weighted(const Integrand& f, const Domain& dom, double alpha, const QuadratureConfig& cfg);

/// int_D f(x) d(x)^{-exponent} dx for any real exponent. Left sides of the
/// Hardy inequality need exponents p + alpha that are usually >= n.
IntegralResult integrate_distance_power(const Integrand& f, const Domain& dom, double exponent,
                                        const QuadratureConfig& cfg);

/// Tail function mu_alpha{x : |f(x)| > level}.
IntegralResult measure_of_superlevel(const Domain& dom, double alpha, const Integrand& f, double level,
                                     const QuadratureConfig& cfg);

/// int_lo^hi f(t) dt by adaptive Gauss-Legendre bisection, for integrands
/// that are smooth on the closed segment.
IntegralResult integrate_segment(const std::function<double(double)>& f, double lo, double hi,
                                 const QuadratureConfig& cfg);

/// Throws NoConvergence unless the result converged or was flagged divergent.
const IntegralResult& require_settled(const IntegralResult& r);

}  // namespace hspw
