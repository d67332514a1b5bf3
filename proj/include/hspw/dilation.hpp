#pragma once

// Dilations V_l[u](x) = u(l x) on half-space products R^d x R^r_+ and the two
// functionals
//
//   L_a[u] = ( int |u|^q d^{-a} )^{1/q},   R_h[u] = ( int |grad u|^p d^{-h} )^{1/p},
//
// whose scaling powers l^{(a - n)/q} and l^{(p - n + h)/p} force the exponent
// relation (a - n)/q = 1 + (h - n)/p for any inequality L <= G R.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hspw/domain.hpp"
#include "hspw/field.hpp"
#include "hspw/quadrature.hpp"

namespace hspw {

struct ExponentConfig {
  double p = 2.0;
  double q = 2.0;
  double a = 0.0;
  double h = 0.0;
  int n = 2;
  int free_dims = 1;      // d of R^d x R^r_+; 0 with positive_dims = 0 means no split
  int positive_dims = 1;  // r

  /// p, q >= 1 and n = d + r when a split is given.
  void validate() const;
};

enum class Unknown { A, H, P, Q };

std::string_view to_string(Unknown u);

struct ExponentSolution {
  double residual = 0.0;          // (a - n)/q - 1 - (h - n)/p of the input
  std::optional<Unknown> solved;  // which exponent was solved for
  double value = 0.0;             // its value
  ExponentConfig config;          // input with the solved exponent filled in
};

/// Residual of the relation, optionally solving it for one exponent. Throws
/// NoSolution when p or q would leave [1, inf) or the relation does not
/// involve the unknown.
ExponentSolution exponent_relation(const ExponentConfig& ecfg, std::optional<Unknown> solve_for = std::nullopt);

/// x -> u(l x), gradient l (grad u)(l x), support and distance breakpoints
/// divided by l. NonpositiveLambda unless l > 0.
ScalarField dilate(const ScalarField& u, double lambda);

/// A closed-form one-dimensional factor supported on [lo, hi].
struct Factor {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  double lo = 0.0;
  double hi = 0.0;
  std::string name;
};

/// ((t - lo)(hi - t))^power on [lo, hi], zero outside.
Factor poly_bump_factor(double lo, double hi, int power = 2);

/// exp(1 - 1 / (1 - z^2)) with z the position in [lo, hi] mapped to [-1, 1].
Factor smooth_bump_factor(double lo, double hi);

Factor dilate(const Factor& f, double lambda);

/// u(x) = prod_i f_i(x_i); the last r factors act on the positive coordinates.
struct ProductField {
  std::vector<Factor> factors;

  int dim() const { return static_cast<int>(factors.size()); }
  AxisBox support() const;
  ScalarField field() const;
};

ProductField dilate(const ProductField& u, double lambda);

/// (int |u|^q d^{-a})^{1/q} for any real a; q >= 1.
NormValue functional_L(const ScalarField& u, const Domain& dom, double a, double q, const QuadratureConfig& cfg);

/// (int |grad u|^p d^{-h})^{1/p}; p >= 1.
NormValue functional_R(const ScalarField& u, const Domain& dom, double h, double p, const QuadratureConfig& cfg);

enum class ProductPath {
  Auto,        // factorized when it applies, generic otherwise
  Factorized,  // products of 1-D integrals: r = 1, and p = 2 for R
  Generic      // slab quadrature on the half-space product, n <= 3
};

NormValue functional_L(const ProductField& u, const Domain& dom, double a, double q, const QuadratureConfig& cfg,
                       ProductPath path = ProductPath::Auto);
NormValue functional_R(const ProductField& u, const Domain& dom, double h, double p, const QuadratureConfig& cfg,
                       ProductPath path = ProductPath::Auto);

/// 9 points log-spaced on [1/8, 8].
std::vector<double> default_lambda_grid();

struct DilationReport {
  std::vector<double> lambdas;
  std::vector<NormValue> L_values;
  std::vector<NormValue> R_values;
  double fitted_L_slope = 0.0;
  double fitted_R_slope = 0.0;
  double predicted_L_slope = 0.0;  // (a - n)/q
  double predicted_R_slope = 0.0;  // (p - n + h)/p
  double relation_residual = 0.0;
  double empirical_G = 0.0;        // max over the grid of L / R, a lower bound for the constant
  double max_pointwise_L_deviation = 0.0;  // |log L(l) - log L(1) - predicted log l|
  double max_pointwise_R_deviation = 0.0;
  bool pointwise_pass = false;     // deviations within the quadrature error
  bool slopes_match = false;       // fitted vs predicted within slope_tolerance
  bool trivial_grid = false;       // every l equal: slopes reported as 0
  bool insufficient_data = false;  // fewer than two grid points
  bool factorized = false;
};

inline constexpr double kSlopeTolerance = 1e-6;

/// Throws SupportEscapesDomain when a dilated support leaves the truncation
/// box or touches y = 0, DimensionMismatch when the split disagrees with the
/// domain.
DilationReport verify_scaling_laws(const ProductField& u, const Domain& dom, const ExponentConfig& ecfg,
                                   const std::vector<double>& lambdas, const QuadratureConfig& cfg,
                                   ProductPath path = ProductPath::Auto);

struct NecessityReport {
  std::vector<double> lambdas;
  std::vector<double> ratios;  // L / R at each l
  double ratio_slope = 0.0;    // observed log-log slope
  double residual = 0.0;       // from the exponent relation
  double slope_error = 0.0;    // |ratio_slope - residual|
  double empirical_G = 0.0;
  bool consistent = false;     // |ratio_slope| <= kSlopeTolerance: no evidence against a uniform constant
  bool insufficient_data = false;
  DilationReport scaling;
};

/// Needs L[u] > 0 and R[u] > 0 (InvalidConfig otherwise).
NecessityReport necessity_probe(const ProductField& u, const Domain& dom, const ExponentConfig& ecfg,
                                const std::vector<double>& lambdas, const QuadratureConfig& cfg,
                                ProductPath path = ProductPath::Auto);

}  // namespace hspw
