#pragma once

// Grand Lebesgue norms ||f|| = sup_p ||f||_{p, mu_alpha} / psi(p) over a
// finite p-grid, and the comparison of T[u] against grad u in these norms.

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hspw/domain.hpp"
#include "hspw/field.hpp"
#include "hspw/quadrature.hpp"

namespace hspw {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class GeneratingFunction {
 public:
  enum class Kind { Power, LogCorrected, Extremal, Natural, Tabulated, Scaled };

  /// psi(p) = p^{1/m}
  static GeneratingFunction power(double m);
  /// psi(p) = p^{1/m} ln^beta(p + 1) L(ln(p + 1)); L must be positive and continuous.
  static GeneratingFunction log_corrected(double m, double beta, std::function<double(double)> slowly_varying = {});
  /// 1 at p = r, +inf elsewhere.
  static GeneratingFunction extremal(double r);
  /// psi(p) = ||grad u||_{p, mu_alpha}, memoized.
  static GeneratingFunction natural(const ScalarField& u, const Domain& dom, double alpha, const QuadratureConfig& cfg);
  /// Linear interpolation in a (p, value) table, +inf outside its p-range.
  static GeneratingFunction tabulated(std::vector<std::pair<double, double>> table);

  double operator()(double p) const { return eval_(p); }

  Kind kind() const { return kind_; }
  const std::string& description() const { return description_; }

  /// Points where psi is finite but its neighbourhood is not (extremal r).
  const std::vector<double>& atoms() const { return atoms_; }

  /// Largest p of the natural domain (b); +inf for the analytic families.
  double upper() const { return upper_; }

  /// True when psi may be searched between grid points.
  bool continuous() const { return atoms_.empty(); }

  /// K(p) * psi(p) with K(p) = p / (p + alpha - n); +inf stays +inf.
  friend GeneratingFunction make_psi_K(const GeneratingFunction& psi, double alpha, int n);

 private:
  GeneratingFunction() = default;

  Kind kind_ = Kind::Power;
  std::function<double(double)> eval_;
  std::string description_;
  std::vector<double> atoms_;
  double upper_ = kInf;
};

GeneratingFunction make_psi_K(const GeneratingFunction& psi, double alpha, int n);

/// "power:m", "logcorr:m,beta", "extremal:r", "natural", "table:path.csv".
/// `natural` needs the field whose gradient defines psi.
GeneratingFunction parse_generating_function(std::string_view spec, const ScalarField* u, const Domain& dom,
                                             double alpha, const QuadratureConfig& cfg);

struct PGrid {
  std::vector<double> points;
  int endpoint_refinement = 0;  // golden-section steps allowed around the argmax
  double lower = 0.0;
  double upper = kInf;
  bool capped = false;          // the upper end was cut at p_max_cap
};

/// Log-spaced offsets from `lower` (dense near the lower end where K(p)
/// blows up), strictly inside (lower, min(upper, cap)); an infinite upper end
/// puts the last point exactly at the cap.
PGrid make_pgrid(double lower, double upper, int count, double p_max_cap = 64.0);

/// Grid for a Gpsi norm on a domain of dimension n: the lower end is
/// max(n - alpha, 1) because L_p norms need p >= 1.
PGrid gls_pgrid(int n, double alpha, const GeneratingFunction& psi, int count = 24, double p_max_cap = 64.0);

struct GlsSample {
  double p;
  NormValue norm;
  double psi;
  double ratio;  // norm / psi, 0 where psi is infinite
};

struct GlsResult {
  double value = 0.0;
  double argmax_p = 0.0;
  bool at_cap = false;
  bool refined = false;        // golden-section refinement improved on the grid
  double error_estimate = 0.0;  // of the winning ratio
  std::vector<GlsSample> samples;  // grid points and atoms, ascending in p
};

/// Throws GlsDivergent (with the offending p in the message) when a norm on
/// the grid diverges.
GlsResult gls_norm(const ScalarField& f, const Domain& dom, double alpha, const GeneratingFunction& psi,
                   const PGrid& grid, const QuadratureConfig& cfg);

struct CertificateRow {
  double p;
  double lhs_ratio;  // ||T u||_p / psi_K(p)
  double rhs_ratio;  // ||grad u||_p / psi(p)
  bool holds;
};

struct Theorem21Report {
  GlsResult lhs;
  GlsResult rhs;
  double ratio = 0.0;  // lhs / rhs
  double tol_slack = 0.0;
  bool vacuous = false;  // rhs = 0
  bool pass = false;
  bool certificate_pass = false;
  std::vector<CertificateRow> certificate;
};

/// ||T u||_{G psi_K} <= ||grad u||_{G psi}, checked at the sup level and per
/// grid point.
Theorem21Report check_theorem_2_1(const ScalarField& u, const Domain& dom, double alpha, const GeneratingFunction& psi,
                                  const PGrid& grid, const QuadratureConfig& cfg);

}  // namespace hspw
