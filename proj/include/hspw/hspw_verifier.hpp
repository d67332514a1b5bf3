#pragma once

// Both sides of the weighted Hardy inequality
//
//   || u / d ||_{p, mu_alpha} <= K(p) || grad u ||_{p, mu_alpha},  K(p) = p / (p + alpha - n),
//
// and a restarted simplex search for fields that push the ratio towards K.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "hspw/domain.hpp"
#include "hspw/field.hpp"
#include "hspw/quadrature.hpp"

namespace hspw {

/// p must clear n - alpha by this much; K(p) blows up at the edge and the
/// left integrand d^{-(p + alpha)} stops being resolvable.
inline constexpr double kCriticalMargin = 1e-3;

/// p / (p + alpha - n); OutOfRange unless p > n - alpha.
double hardy_constant(double p, double alpha, int n);

enum class HspwStatus { Ok, Vacuous, RhsDivergent, LhsDivergent };

std::string_view to_string(HspwStatus s);

struct HspwReport {
  double p = 0.0;
  double alpha = 0.0;
  int n = 0;
  NormValue lhs;  // || u / d ||
  NormValue rhs;  // || grad u ||
  double K = 0.0;
  double ratio = 0.0;
  double slack = 0.0;      // K - ratio
  double tol_slack = 0.0;  // relative allowance from the quadrature error estimates
  bool pass = false;
  bool converged = true;
  HspwStatus status = HspwStatus::Ok;
};

/// Divergent sides and u = 0 are reported through `status`, not thrown.
/// Throws OutOfRange for p < n - alpha + kCriticalMargin, InvalidP for p < 1.
HspwReport verify_hspw(const ScalarField& u, const Domain& dom, double alpha, double p, const QuadratureConfig& cfg);

struct TrialFamily {
  std::vector<double> lower;  // parameter box
  std::vector<double> upper;
  std::function<ScalarField(const std::vector<double>&)> instantiate;
  std::string description;

  int dim() const { return static_cast<int>(lower.size()); }
};

/// u = phi(d), phi(s) = s^beta on (0, 1] then linear down to 0 at s = M, with
/// (beta, M) in [beta_lo, beta_hi] x [M_lo, M_hi]. M_hi <= 0 picks the
/// distance of the domain's interior point to the boundary.
TrialFamily power_profile_family(const Domain& dom, double beta_lo = 0.51, double beta_hi = 1.5, double M_lo = 1.5,
                                 double M_hi = 0.0);

/// One field, no parameters.
TrialFamily single_member_family(ScalarField u);

/// u = theta, theta in [lo, hi]: never admissible.
TrialFamily constant_family(double lo = 0.5, double hi = 2.0);

struct SharpnessConfig {
  int budget = 500;            // objective evaluations
  int restarts = 5;
  int restart_budget = 200;    // cap per restart, independent of `budget`
  double simplex_scale = 0.25; // initial edge, as a fraction of the box
  double x_tol = 1e-6;         // simplex diameter in unit-box coordinates
  double f_tol = 1e-10;        // relative spread of the simplex values
  std::uint64_t seed = 1;
};

struct TrialEvaluation {
  std::vector<double> theta;
  double ratio;
  HspwStatus status;
};

struct SharpnessResult {
  double best_ratio = 0.0;
  std::vector<double> best_theta;
  double K = 0.0;
  double gap_to_K = 0.0;
  double tol_slack = 0.0;  // of the best evaluation
  int evaluations = 0;
  int restarts_completed = 0;
  bool budget_exhausted = false;
  std::vector<TrialEvaluation> trace;  // in evaluation order
};

/// Maximizes lhs / rhs over the family. The evaluation sequence does not
/// depend on the budget, so a larger budget never lowers best_ratio.
/// Throws InfeasibleFamily when no evaluated member has finite positive sides.
SharpnessResult sharpness_search(const TrialFamily& family, const Domain& dom, double alpha, double p,
                                 const QuadratureConfig& cfg, const SharpnessConfig& scfg = {});

}  // namespace hspw
