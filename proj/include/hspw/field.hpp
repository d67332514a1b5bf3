#pragma once

// Test functions u on a domain and the quantities built from them: gradients,
// the operator T[u] = u / d, weighted L_p norms and the Sobolev norm.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hspw/domain.hpp"
#include "hspw/quadrature.hpp"
#include "hspw/types.hpp"

namespace hspw {

struct ScalarField {
  std::function<double(const Point&)> value;
  std::function<Point(const Point&)> gradient;  // empty: finite differences
  std::optional<AxisBox> support;               // identically zero outside
  std::vector<double> distance_breakpoints;     // kinks of a profile in d
  bool vanishes_near_boundary = false;
  std::string name;

  double operator()(const Point& x) const { return value(x); }
  bool has_gradient() const { return static_cast<bool>(gradient); }
};

struct NormValue {
  double value = 0.0;
  double p = 0.0;
  double alpha = 0.0;
  double error_estimate = 0.0;
  bool divergent_flag = false;
  bool converged = true;
};

ScalarField zero_field();

/// c * u, keeping gradient and support.
ScalarField scaled(const ScalarField& u, double c);

/// Declared gradient, or central differences with h = max(1e-6, 1e-6 |x|)
/// per axis, falling back to one-sided stencils near the boundary.
Point gradient_at(const ScalarField& u, const Point& x, const Domain& dom);

/// x -> u(x) / d(x, dD).
ScalarField apply_hardy_operator(const ScalarField& u, const Domain& dom);

/// x -> |grad u(x)| (no gradient of its own).
ScalarField gradient_magnitude(const ScalarField& u, const Domain& dom);

/// |u|^p as a quadrature integrand.
Integrand power_integrand(const ScalarField& u, double p);

/// ( int |u|^p d^{-alpha} dx )^{1/p}, 1 <= p < inf, alpha < n.
NormValue weighted_lp_norm(const ScalarField& u, const Domain& dom, double alpha, double p,
                           const QuadratureConfig& cfg);

/// ( int |u|^p d^{-exponent} dx )^{1/p} for any real weight power. Inequality
/// left sides and the dilation functionals need exponent >= n.
NormValue distance_weighted_norm(const ScalarField& u, const Domain& dom, double exponent, double p,
                                 const QuadratureConfig& cfg);

NormValue gradient_lp_norm(const ScalarField& u, const Domain& dom, double alpha, double p,
                           const QuadratureConfig& cfg);

enum class SobolevConvention {
  Paper,    // |grad u|_p^{1/p} + |u|_p
  Standard  // |grad u|_p + |u|_p
};

double sobolev_norm(const ScalarField& u, const Domain& dom, double p, const QuadratureConfig& cfg,
                    SobolevConvention convention = SobolevConvention::Paper);

/// mu_alpha{x : |u(x)| > level}.
double tail_function(const ScalarField& u, const Domain& dom, double alpha, double level,
                     const QuadratureConfig& cfg);

}  // namespace hspw
