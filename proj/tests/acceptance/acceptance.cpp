// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// The numbers behind each verdict are printed next to it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "hspw/dilation.hpp"
#include "hspw/error.hpp"
#include "hspw/field_library.hpp"
#include "hspw/grand_lebesgue.hpp"
#include "hspw/hspw_verifier.hpp"
#include "hspw/quadrature.hpp"
#include "hspw/report.hpp"

using namespace hspw;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [FAILED: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0) v.require(secs <= budget_s, "runtime over " + std::to_string(budget_s) + " s");
  if (!v.pass) ++failures;
  std::printf("criterion %d %s: %s (%.2f s)%s\n", id, v.pass ? "PASS" : "FAIL", title, secs, v.detail.str().c_str());
  std::fflush(stdout);
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

bool throws_out_of_range(double p, double alpha, int n) {
  try {
    hardy_constant(p, alpha, n);
  } catch (const Error& e) {
    return e.code() == ErrorCode::OutOfRange;
  }
  return false;
}

struct Case {
  std::string field;
  Domain dom;
  double alpha;
  double p;
};

// Interval, unit square and unit disk; alpha in {0, 0.5, 1.5} below n and
// p in {1.5, 2, 4} above n - alpha. Fields stay admissible at alpha = 1.5
// (their gradients vanish at the boundary). In 2-D the power field is d^2:
// with d^1.5 at alpha = 1.5 the gradient norm is only finite for p > 1, the
// very end of the grand Lebesgue p-grid.
std::vector<Case> corpus() {
  const Domain unit = Domain::interval(0, 1);
  const Domain square = Domain::box(make_point({0, 0}), make_point({1, 1}));
  const Domain disk = Domain::ball(make_point({0, 0}), 1.0);
  std::vector<Case> out;
  for (const Domain* dom : {&unit, &square, &disk}) {
    const int n = dom->dim();
    const std::vector<std::string> fields =
        n == 1 ? std::vector<std::string>{"poly:t*(1-t)", "bump", "power:1.5"} : std::vector<std::string>{"bump", "power:2"};
    for (const auto& f : fields)
      for (double alpha : {0.0, 0.5, 1.5}) {
        if (alpha >= n) continue;
        for (double p : {1.5, 2.0, 4.0})
          if (p >= n - alpha + kCriticalMargin) out.push_back({f, *dom, alpha, p});
      }
  }
  return out;
}

std::string corpus_json(const QuadratureConfig& cfg) {
  lab::Json all = lab::Json::array();
  for (const auto& c : corpus()) all.push_back(lab::to_json(verify_hspw(parse_field(c.field, c.dom), c.dom, c.alpha, c.p, cfg)));
  return all.dump();
}

ExponentConfig planar(double p, double q, double a, double h) {
  ExponentConfig e;
  e.p = p;
  e.q = q;
  e.a = a;
  e.h = h;
  e.n = 2;
  e.free_dims = 1;
  e.positive_dims = 1;
  return e;
}

}  // namespace

int main() {
  const QuadratureConfig cfg;
  const Domain unit = Domain::interval(0, 1);
  const auto parabola = parse_field("poly:t*(1-t)", unit);

  criterion(1, "sharp constant formula", 1, [](Verdict& v) {
    const double k1 = hardy_constant(2, 0, 1), k2 = hardy_constant(4, 1, 3);
    v.detail << " K(2;0,1)=" << k1 << " K(4;1,3)=" << k2;
    v.require(k1 == 2.0 && k2 == 2.0, "exact values");
    v.require(throws_out_of_range(2, 0, 2) && throws_out_of_range(1.5, 0, 2) && throws_out_of_range(1, 1.5, 3),
              "p <= n - alpha rejected");
  });

  criterion(2, "closed-form norm oracles", 5, [&](Verdict& v) {
    struct Oracle {
      const char* name;
      double got, want;
    };
    const std::vector<Oracle> oracles{
        {"|u|_2^2=1/30", std::pow(weighted_lp_norm(parabola, unit, 0, 2, cfg).value, 2), 1.0 / 30},
        {"int u/d=3/4", distance_weighted_norm(parabola, unit, 1, 1, cfg).value, 0.75},
        {"int (u/d)^2=7/12", std::pow(distance_weighted_norm(parabola, unit, 2, 2, cfg).value, 2), 7.0 / 12},
        {"|u'|_2^2=1/3", std::pow(gradient_lp_norm(parabola, unit, 0, 2, cfg).value, 2), 1.0 / 3},
        // the integral of min(t, 1-t)^(-1/2) over (0, 1)
        {"int d^-1/2=2sqrt2", integrate_weighted(Integrand{[](const Point&) { return 1.0; }, std::nullopt, {}, false},
                                                 unit, 0.5, cfg).value,
         2 * std::sqrt(2.0)}};
    for (const auto& o : oracles) {
      const double e = rel_err(o.got, o.want);
      v.detail << " " << o.name << ":" << e;
      v.require(e <= 1e-7, o.name);
    }
  });

  criterion(3, "inequality corpus", 120, [&](Verdict& v) {
    const auto cases = corpus();
    int passed = 0;
    double worst = 0;
    for (const auto& c : cases) {
      const auto r = verify_hspw(parse_field(c.field, c.dom), c.dom, c.alpha, c.p, cfg);
      const bool ok = r.status == HspwStatus::Ok && r.pass && r.ratio <= r.K * (1 + r.tol_slack);
      if (ok) ++passed;
      else v.require(false, c.dom.kind() + " " + c.field + " alpha=" + std::to_string(c.alpha) + " p=" + std::to_string(c.p));
      worst = std::max(worst, r.ratio / r.K);
    }
    v.detail << " " << passed << "/" << cases.size() << " pass, max ratio/K=" << worst;
    v.require(cases.size() >= 20, "corpus size");
  });

  criterion(4, "sharpness approach", 120, [&](Verdict& v) {
    const Domain wide = Domain::interval(0, 200);
    const auto fam = power_profile_family(wide);
    SharpnessConfig s;
    double prev = 0;
    for (int budget : {125, 250, 500}) {
      s.budget = budget;
      const auto res = sharpness_search(fam, wide, 0, 2, cfg, s);
      v.detail << " budget " << budget << ":" << res.best_ratio;
      v.require(res.best_ratio >= prev, "nondecreasing in budget");
      v.require(res.evaluations <= budget, "budget respected");
      prev = res.best_ratio;
    }
    v.require(prev >= 1.9, "best_ratio >= 1.9 at budget 500");
  });

  criterion(5, "grand Lebesgue reductions", 30, [&](Verdict& v) {
    for (double r : {2.0, 3.0}) {
      const auto psi = GeneratingFunction::extremal(r);
      const double g = gls_norm(parabola, unit, 0.5, psi, gls_pgrid(1, 0.5, psi, 8), cfg).value;
      const double e = rel_err(g, weighted_lp_norm(parabola, unit, 0.5, r, cfg).value);
      v.detail << " extremal(" << r << "):" << e;
      v.require(e <= 1e-10, "extremal reduction");
    }
    const Domain sq = Domain::box(make_point({0, 0}), make_point({1, 1}));
    const auto u = parse_field("poly:x*(1-x)*y*(1-y)", sq);
    for (const auto& [dom, f] : {std::pair{&unit, parabola}, std::pair{&sq, u}}) {
      const auto psi = GeneratingFunction::natural(f, *dom, 0.5, cfg);
      const double g = gls_norm(gradient_magnitude(f, *dom), *dom, 0.5, psi, gls_pgrid(dom->dim(), 0.5, psi, 10), cfg).value;
      v.detail << " natural " << dom->kind() << ":" << std::abs(g - 1);
      v.require(std::abs(g - 1) <= 1e-10, "natural psi");
    }
  });

  criterion(6, "grand Lebesgue comparison over the corpus", 180, [&](Verdict& v) {
    // the check is a statement about the whole p-range, so each
    // (field, domain, alpha) of the corpus is checked once per psi
    std::vector<Case> combos;
    for (const auto& c : corpus()) {
      bool seen = false;
      for (const auto& d : combos) seen = seen || (d.field == c.field && d.dom.kind() == c.dom.kind() && d.alpha == c.alpha);
      if (!seen) combos.push_back(c);
    }
    int checks = 0, passed = 0;
    double worst = 0;
    for (const auto& c : combos) {
      const auto u = parse_field(c.field, c.dom);
      for (const char* spec : {"power:2", "logcorr:2,1", "natural"}) {
        const std::string label = c.dom.kind() + " " + c.field + " alpha=" + std::to_string(c.alpha) + " " + spec;
        ++checks;
        try {
          const auto psi = parse_generating_function(spec, &u, c.dom, c.alpha, cfg);
          const auto rep = check_theorem_2_1(u, c.dom, c.alpha, psi, gls_pgrid(c.dom.dim(), c.alpha, psi, 12), cfg);
          const bool ok = rep.pass && rep.certificate_pass && rep.ratio <= 1 + rep.tol_slack;
          if (ok) ++passed;
          else v.require(false, label);
          worst = std::max(worst, rep.ratio);
        } catch (const Error& e) {
          v.require(false, label + ": " + e.what());
        }
      }
    }
    v.detail << " " << passed << "/" << checks << " pass (" << combos.size() << " field/domain/alpha x 3 psi), max lhs/rhs="
             << worst;
  });

  criterion(7, "dilation exactness", 60, [&](Verdict& v) {
    const Domain plane = Domain::halfspace_product(1, 1, AxisBox{make_point({-4, 0}), make_point({4, 8})});
    const ProductField u{{poly_bump_factor(-0.25, 0.25), poly_bump_factor(0.5, 1.0)}};
    // the two worked examples: L_0 halves under V_2 (q = 2), R_0 invariant at p = 2
    const auto two = verify_scaling_laws(u, plane, planar(2, 2, 0, 0), {1.0, 2.0}, cfg);
    v.require(rel_err(two.L_values[1].value, two.L_values[0].value / 2) <= 1e-10, "L_0[V_2 u] = L_0[u]/2");
    v.require(rel_err(two.R_values[1].value, two.R_values[0].value) <= 1e-10 && two.predicted_R_slope == 0,
              "R_0 invariant");

    struct Setting {
      const Domain* dom;
      const ProductField* field;
      ExponentConfig e;
    };
    std::vector<Setting> settings;
    for (const auto& e : {planar(2, 2, 0, 0), planar(2, 3, 1, 0.5), planar(2, 1, -1, 2), planar(3, 2, 0.5, 0),
                          planar(1.5, 4, 3, -0.5)})
      settings.push_back({&plane, &u, e});
    // R^2 x R_+ through the generic slab path
    const Domain space = Domain::halfspace_product(2, 1, AxisBox{make_point({-4, -4, 0}), make_point({4, 4, 8})});
    const ProductField u3{{smooth_bump_factor(-0.3, 0.3), poly_bump_factor(-0.2, 0.25), poly_bump_factor(0.5, 1.0)}};
    ExponentConfig e3;
    e3.n = 3;
    e3.free_dims = 2;
    e3.positive_dims = 1;
    e3.p = 3;
    e3.q = 2;
    e3.a = 0.5;
    e3.h = 1;
    settings.push_back({&space, &u3, e3});
    double worst = 0;
    for (const auto& s : settings) {
      const auto rep = verify_scaling_laws(*s.field, *s.dom, s.e, default_lambda_grid(), cfg);
      const double n = s.e.n;
      const double dl = std::abs(rep.fitted_L_slope - (s.e.a - n) / s.e.q);
      const double dr = std::abs(rep.fitted_R_slope - (s.e.p - n + s.e.h) / s.e.p);
      worst = std::max({worst, dl, dr});
      v.require(dl <= 1e-6 && dr <= 1e-6 && rep.pointwise_pass, "slopes for n=" + std::to_string(s.e.n) +
                                                                     " p=" + std::to_string(s.e.p) + " q=" + std::to_string(s.e.q));
    }
    v.detail << " " << settings.size() << " settings, max slope error=" << worst;
  });

  criterion(8, "necessity residual", 60, [&](Verdict& v) {
    const Domain plane = Domain::halfspace_product(1, 1, AxisBox{make_point({-4, 0}), make_point({4, 8})});
    const ProductField u{{poly_bump_factor(-0.25, 0.25), poly_bump_factor(0.5, 1.0)}};
    std::vector<ExponentConfig> configs;
    for (auto [p, q, h] : {std::tuple{2.0, 3.0, 0.5}, std::tuple{3.0, 2.0, 0.0}, std::tuple{1.5, 4.0, -0.5}}) {
      ExponentConfig e = planar(p, q, 0, h);
      e.a = exponent_relation(e, Unknown::A).value;
      configs.push_back(e);
    }
    for (const auto& e : {planar(2, 2, 0, 0), planar(2, 3, 1, 0.5), planar(3, 2, 0.5, 0)}) configs.push_back(e);
    int satisfying = 0, violating = 0;
    double worst = 0;
    for (const auto& e : configs) {
      const auto rep = necessity_probe(u, plane, e, default_lambda_grid(), cfg);
      const double err = std::abs(rep.ratio_slope - rep.residual);
      worst = std::max(worst, err);
      (std::abs(rep.residual) < 1e-12 ? satisfying : violating)++;
      v.require(err <= 1e-6, "slope vs residual " + std::to_string(rep.residual));
      v.require(rep.consistent == (std::abs(rep.residual) < 1e-12), "consistency flag");
    }
    v.require(satisfying == 3 && violating == 3, "3 satisfying and 3 violating");
    ExponentConfig sob;
    sob.n = 3;
    sob.free_dims = sob.positive_dims = 0;
    sob.p = 2;
    sob.a = sob.h = 0;
    const double q = exponent_relation(sob, Unknown::Q).value;
    v.detail << " max |slope - residual|=" << worst << " q(3,2,0,0)=" << q;
    v.require(std::abs(q - 6) <= 1e-14, "q = 6");
  });

  criterion(9, "determinism across thread counts", 0, [&](Verdict& v) {
    setenv("HSPW_LAB_THREADS", "1", 1);
    const std::string one = corpus_json(cfg);
    setenv("HSPW_LAB_THREADS", "8", 1);
    const std::string eight = corpus_json(cfg);
    unsetenv("HSPW_LAB_THREADS");
    v.detail << " " << one.size() << " bytes each";
    v.require(one == eight, "JSON differs between 1 and 8 threads");
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
