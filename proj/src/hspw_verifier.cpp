#include "hspw/hspw_verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "hspw/error.hpp"
#include "hspw/field_library.hpp"

namespace hspw {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

double relative_error(const NormValue& v) { return v.value > 0 ? v.error_estimate / v.value : 0.0; }

}  // namespace

double hardy_constant(double p, double alpha, int n) {
  if (!(p > n - alpha)) {
    throw Error(ErrorCode::OutOfRange, "K(p) needs p > n - alpha, got p = " + fmt(p) + " with n - alpha = " + fmt(n - alpha));
  }
  return p / (p + alpha - n);
}

std::string_view to_string(HspwStatus s) {
  switch (s) {
    case HspwStatus::Ok: return "ok";
    case HspwStatus::Vacuous: return "vacuous";
    case HspwStatus::RhsDivergent: return "rhs_divergent";
    case HspwStatus::LhsDivergent: return "lhs_divergent";
  }
  return "unknown";
}

HspwReport verify_hspw(const ScalarField& u, const Domain& dom, double alpha, double p, const QuadratureConfig& cfg) {
  const int n = dom.dim();
  if (!(alpha < n)) throw Error(ErrorCode::InvalidAlpha, "alpha = " + fmt(alpha) + " must stay below n = " + std::to_string(n));
  if (!(p >= n - alpha + kCriticalMargin)) {
    throw Error(ErrorCode::OutOfRange, "p = " + fmt(p) + " is within " + fmt(kCriticalMargin) + " of n - alpha = " +
                                           fmt(n - alpha) + " or below it");
  }
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidP, "p = " + fmt(p) + " < 1");

  HspwReport rep;
  rep.p = p;
  rep.alpha = alpha;
  rep.n = n;
  rep.K = hardy_constant(p, alpha, n);
  // || u / d ||_{p, mu_alpha}^p = int |u|^p d^{-(p + alpha)}: no division by d in the integrand
  rep.rhs = gradient_lp_norm(u, dom, alpha, p, cfg);
  rep.lhs = distance_weighted_norm(u, dom, p + alpha, p, cfg);
  rep.lhs.alpha = alpha;
  rep.converged = rep.lhs.converged && rep.rhs.converged;
  rep.tol_slack = std::max(10.0 * (relative_error(rep.lhs) + relative_error(rep.rhs)), cfg.rel_tol);

  if (rep.rhs.divergent_flag) {
    rep.status = HspwStatus::RhsDivergent;
  } else if (rep.lhs.divergent_flag) {
    rep.status = HspwStatus::LhsDivergent;
  } else if (rep.rhs.value == 0.0 && rep.lhs.value == 0.0) {
    rep.status = HspwStatus::Vacuous;
  } else {
    rep.status = HspwStatus::Ok;
  }

  switch (rep.status) {
    case HspwStatus::Ok:
      rep.ratio = rep.rhs.value > 0 ? rep.lhs.value / rep.rhs.value : std::numeric_limits<double>::infinity();
      rep.slack = rep.K - rep.ratio;
      rep.pass = rep.ratio <= rep.K * (1.0 + rep.tol_slack);
      break;
    case HspwStatus::Vacuous:
      rep.slack = rep.K;
      rep.pass = true;
      break;
    default:
      // a divergent side says nothing about the constant
      rep.ratio = std::numeric_limits<double>::quiet_NaN();
      rep.slack = std::numeric_limits<double>::quiet_NaN();
      rep.pass = false;
  }
  return rep;
}

TrialFamily power_profile_family(const Domain& dom, double beta_lo, double beta_hi, double M_lo, double M_hi) {
  if (M_hi <= 0) M_hi = distance_to_boundary(dom, dom.interior_point());
  if (!(beta_lo > 0 && beta_lo <= beta_hi) || !(M_lo > 1 && M_lo <= M_hi)) {
    throw Error(ErrorCode::InvalidConfig, "profile family needs 0 < beta_lo <= beta_hi and 1 < M_lo <= M_hi, got [" +
                                              fmt(beta_lo) + ", " + fmt(beta_hi) + "] x [" + fmt(M_lo) + ", " +
                                              fmt(M_hi) + "]");
  }
  TrialFamily f;
  f.lower = {beta_lo, M_lo};
  f.upper = {beta_hi, M_hi};
  f.instantiate = [dom](const std::vector<double>& th) { return power_profile_field(dom, th[0], th[1]); };
  f.description = "profile(beta in [" + fmt(beta_lo) + ", " + fmt(beta_hi) + "], M in [" + fmt(M_lo) + ", " +
                  fmt(M_hi) + "])";
  return f;
}

TrialFamily single_member_family(ScalarField u) {
  TrialFamily f;
  f.description = u.name.empty() ? "single field" : u.name;
  f.instantiate = [u = std::move(u)](const std::vector<double>&) { return u; };
  return f;
}

TrialFamily constant_family(double lo, double hi) {
  TrialFamily f;
  f.lower = {lo};
  f.upper = {hi};
  f.instantiate = [](const std::vector<double>& th) {
    ScalarField u;
    const double c = th[0];
    u.value = [c](const Point&) { return c; };
    u.gradient = [](const Point& x) { return Point(Point::Zero(x.size())); };
    u.name = "const:" + fmt(c);
    return u;
  };
  f.description = "constants in [" + fmt(lo) + ", " + fmt(hi) + "]";
  return f;
}

namespace {

// Nelder-Mead on the unit cube, minimizing -ratio; points are clamped into
// the cube. Each restart runs to its own stopping rule, so the sequence of
// evaluated points is fixed by the seed alone and the budget only truncates it.
class SimplexSearch {
 public:
  SimplexSearch(const TrialFamily& fam, const Domain& dom, double alpha, double p, const QuadratureConfig& cfg,
                const SharpnessConfig& scfg)
      : fam_(fam), dom_(dom), alpha_(alpha), p_(p), cfg_(cfg), scfg_(scfg), k_(fam.dim()) {}

  SharpnessResult run() {
    res_.K = hardy_constant(p_, alpha_, dom_.dim());
    if (k_ == 0) {
      evaluate({});
      res_.restarts_completed = out_ ? 0 : 1;
    } else {
      std::mt19937_64 rng(scfg_.seed);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (int r = 0; r < scfg_.restarts && !out_; ++r) {
        std::vector<double> start(static_cast<std::size_t>(k_), 0.5);
        if (r > 0)
          for (double& y : start) y = unit(rng);
        restart(start);
        if (!out_) ++res_.restarts_completed;
      }
    }
    res_.budget_exhausted = out_;
    if (!have_best_) {
      throw Error(ErrorCode::InfeasibleFamily,
                  "no member of " + fam_.description + " has finite, positive sides at p = " + fmt(p_));
    }
    res_.gap_to_K = res_.K - res_.best_ratio;
    return res_;
  }

 private:
  using Vec = std::vector<double>;

  std::vector<double> to_theta(const Vec& y) const {
    Vec th(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) th[i] = fam_.lower[i] + y[i] * (fam_.upper[i] - fam_.lower[i]);
    return th;
  }

  static Vec clamp(Vec y) {
    for (double& v : y) v = std::clamp(v, 0.0, 1.0);
    return y;
  }

  // objective to minimize; +inf for inadmissible members
  double evaluate(const Vec& y) {
    if (auto it = cache_.find(y); it != cache_.end()) return it->second;
    if (out_ || res_.evaluations >= scfg_.budget) {
      out_ = true;
      return std::numeric_limits<double>::infinity();
    }
    const Vec th = to_theta(y);
    const HspwReport rep = verify_hspw(fam_.instantiate(th), dom_, alpha_, p_, cfg_);
    ++res_.evaluations;
    ++restart_evals_;
    const bool ok = rep.status == HspwStatus::Ok && std::isfinite(rep.ratio) && rep.ratio > 0;
    res_.trace.push_back({th, ok ? rep.ratio : std::numeric_limits<double>::quiet_NaN(), rep.status});
    if (ok && (!have_best_ || rep.ratio > res_.best_ratio)) {
      have_best_ = true;
      res_.best_ratio = rep.ratio;
      res_.best_theta = th;
      res_.tol_slack = rep.tol_slack;
    }
    const double f = ok ? -rep.ratio : std::numeric_limits<double>::infinity();
    cache_.emplace(y, f);
    return f;
  }

  bool stop() const { return out_ || restart_evals_ >= scfg_.restart_budget; }

  void restart(const Vec& start) {
    restart_evals_ = 0;
    const std::size_t m = static_cast<std::size_t>(k_) + 1;
    std::vector<Vec> pts(m, start);
    for (int i = 0; i < k_; ++i) {
      double& c = pts[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(i)];
      c = c + scfg_.simplex_scale <= 1.0 ? c + scfg_.simplex_scale : c - scfg_.simplex_scale;
    }
    std::vector<double> f(m);
    for (std::size_t i = 0; i < m && !stop(); ++i) f[i] = evaluate(pts[i]);

    std::vector<std::size_t> order(m);
    while (!stop()) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[m - 2];

      double diameter = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        for (int j = 0; j < k_; ++j)
          diameter = std::max(diameter, std::abs(pts[i][static_cast<std::size_t>(j)] - pts[best][static_cast<std::size_t>(j)]));
      const double spread = std::abs(f[worst] - f[best]);
      if (diameter <= scfg_.x_tol ||
          (std::isfinite(spread) && spread <= scfg_.f_tol * std::max(std::abs(f[best]), 1e-300)))
        return;

      Vec centroid(static_cast<std::size_t>(k_), 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        if (i == worst) continue;
        for (int j = 0; j < k_; ++j) centroid[static_cast<std::size_t>(j)] += pts[i][static_cast<std::size_t>(j)] / k_;
      }
      auto along = [&](double t) {
        Vec y(static_cast<std::size_t>(k_));
        for (std::size_t j = 0; j < y.size(); ++j) y[j] = centroid[j] + t * (pts[worst][j] - centroid[j]);
        return clamp(y);
      };

      const Vec yr = along(-1.0);
      const double fr = evaluate(yr);
      if (stop()) return;
      if (fr < f[best]) {
        const Vec ye = along(-2.0);
        const double fe = evaluate(ye);
        if (fe < fr) {
          pts[worst] = ye;
          f[worst] = fe;
        } else {
          pts[worst] = yr;
          f[worst] = fr;
        }
        continue;
      }
      if (fr < f[second]) {
        pts[worst] = yr;
        f[worst] = fr;
        continue;
      }
      const bool outside = fr < f[worst];
      const Vec yc = along(outside ? -0.5 : 0.5);
      const double fc = evaluate(yc);
      if (stop()) return;
      if (fc < (outside ? fr : f[worst])) {
        pts[worst] = yc;
        f[worst] = fc;
        continue;
      }
      for (std::size_t i = 0; i < m && !stop(); ++i) {
        if (i == best) continue;
        for (int j = 0; j < k_; ++j) {
          auto& v = pts[i][static_cast<std::size_t>(j)];
          v = pts[best][static_cast<std::size_t>(j)] + 0.5 * (v - pts[best][static_cast<std::size_t>(j)]);
        }
        f[i] = evaluate(pts[i]);
      }
    }
  }

  const TrialFamily& fam_;
  const Domain& dom_;
  double alpha_, p_;
  const QuadratureConfig& cfg_;
  const SharpnessConfig& scfg_;
  int k_;

  SharpnessResult res_;
  std::map<Vec, double> cache_;
  int restart_evals_ = 0;
  bool out_ = false;
  bool have_best_ = false;
};

}  // namespace

SharpnessResult sharpness_search(const TrialFamily& family, const Domain& dom, double alpha, double p,
                                 const QuadratureConfig& cfg, const SharpnessConfig& scfg) {
  if (family.lower.size() != family.upper.size() || !family.instantiate)
    throw Error(ErrorCode::InvalidConfig, "trial family needs matching bounds and an instantiate map");
  for (std::size_t i = 0; i < family.lower.size(); ++i) {
    if (!(family.lower[i] <= family.upper[i]))
      throw Error(ErrorCode::InvalidConfig, "trial family bound " + std::to_string(i) + " is empty");
  }
  if (scfg.budget < 1 || scfg.restarts < 1 || scfg.restart_budget < 1 || !(scfg.simplex_scale > 0))
    throw Error(ErrorCode::InvalidConfig, "sharpness search needs positive budget, restarts and simplex scale");
  return SimplexSearch(family, dom, alpha, p, cfg, scfg).run();
}

}  // namespace hspw
