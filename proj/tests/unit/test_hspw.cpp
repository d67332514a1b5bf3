#include <cmath>
#include <functional>
#include <string>

#include "doctest.h"
#include "hspw/error.hpp"
#include "hspw/field_library.hpp"
#include "hspw/hspw_verifier.hpp"

using namespace hspw;

namespace {

const Domain unit = Domain::interval(0, 1);

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("sharp constant") {
  CHECK(hardy_constant(2, 0, 1) == 2.0);
  CHECK(hardy_constant(4, 1, 3) == 2.0);
  CHECK(code_of([] { hardy_constant(1, 0, 1); }) == ErrorCode::OutOfRange);
  CHECK(code_of([] { hardy_constant(0.5, 0.5, 1); }) == ErrorCode::OutOfRange);
  double prev = HUGE_VAL;
  for (double p = 1.51; p < 100; p *= 1.3) {
    const double k = hardy_constant(p, 0.5, 2);
    CHECK(k > 1);
    CHECK(k < prev);
    prev = k;
  }
  CHECK(hardy_constant(1e9, 0, 3) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("verify_hspw closed forms") {
  QuadratureConfig cfg;
  const auto u = parse_field("poly:t*(1-t)", unit);
  const auto r = verify_hspw(u, unit, 0, 2, cfg);
  CHECK(r.status == HspwStatus::Ok);
  CHECK(r.lhs.value == doctest::Approx(std::sqrt(7.0 / 12)).epsilon(1e-9));
  CHECK(r.rhs.value == doctest::Approx(std::sqrt(1.0 / 3)).epsilon(1e-9));
  CHECK(r.ratio == doctest::Approx(std::sqrt(7.0 / 4)).epsilon(1e-9));
  CHECK(r.K == 2.0);
  CHECK(r.slack == doctest::Approx(2 - std::sqrt(7.0 / 4)).epsilon(1e-9));
  CHECK(r.pass);

  // T[d] = 1 and |grad d| = 1
  const auto d = verify_hspw(parse_field("distance", unit), unit, 0, 2, cfg);
  CHECK(d.ratio == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d.pass);

  const auto z = verify_hspw(zero_field(), unit, 0, 2, cfg);
  CHECK(z.status == HspwStatus::Vacuous);
  CHECK(z.pass);
}

TEST_CASE("verify_hspw scale invariance") {
  QuadratureConfig cfg;
  const auto u = parse_field("poly:t*(1-t)", unit);
  const double base = verify_hspw(u, unit, 0, 2, cfg).ratio;
  for (double c : {-3.0, 0.01, 7.5}) {
    const double r = verify_hspw(scaled(u, c), unit, 0, 2, cfg).ratio;
    CHECK(std::abs(r / base - 1) <= 1e-12);
  }
}

TEST_CASE("verify_hspw divergent sides and preconditions") {
  QuadratureConfig cfg;
  // |grad d^0.3|^2 ~ d^-1.4
  CHECK(verify_hspw(distance_power_field(unit, 0.3), unit, 0, 2, cfg).status == HspwStatus::RhsDivergent);
  // u does not vanish on the boundary
  const auto lhs_div = verify_hspw(parse_field("poly:1+t", unit), unit, 0, 2, cfg);
  CHECK(lhs_div.status == HspwStatus::LhsDivergent);
  CHECK_FALSE(lhs_div.pass);

  const auto u = parse_field("poly:t*(1-t)", unit);
  CHECK(code_of([&] { verify_hspw(u, unit, 0, 1.0005, cfg); }) == ErrorCode::OutOfRange);
  CHECK(code_of([&] { verify_hspw(u, unit, 0, 1.0, cfg); }) == ErrorCode::OutOfRange);
  CHECK(code_of([&] { verify_hspw(u, unit, 1.0, 2, cfg); }) == ErrorCode::InvalidAlpha);
}

TEST_CASE("inequality holds on 2-D shapes") {
  QuadratureConfig cfg;
  const Domain sq = Domain::box(Point::Zero(2), Point::Ones(2));
  const Domain disk = Domain::ball(Point::Zero(2), 1.0);
  for (const Domain* dom : {&sq, &disk}) {
    for (std::string f : {"bump", "distance", "power:1.5"}) {
      const auto u = parse_field(f, *dom);
      for (double alpha : {0.0, 0.5, 1.5}) {
        for (double p : {1.5, 2.0, 4.0}) {
          if (p < 2 - alpha + kCriticalMargin) continue;
          const auto r = verify_hspw(u, *dom, alpha, p, cfg);
          INFO(dom->kind(), " ", f, " alpha=", alpha, " p=", p, " ratio=", r.ratio, " K=", r.K);
          // |grad d| = 1 up to the boundary and d^-alpha is not integrable across it for alpha >= 1
          if (f == "distance" && alpha >= 1) {
            CHECK(r.status == HspwStatus::RhsDivergent);
            continue;
          }
          CHECK(r.status == HspwStatus::Ok);
          CHECK(r.pass);
        }
      }
    }
  }
}

TEST_CASE("sharpness search") {
  QuadratureConfig cfg;
  SUBCASE("single member") {
    const auto res = sharpness_search(single_member_family(parse_field("poly:t*(1-t)", unit)), unit, 0, 2, cfg);
    CHECK(res.best_ratio == doctest::Approx(1.322876).epsilon(1e-6));
    CHECK(res.evaluations == 1);
    CHECK_FALSE(res.budget_exhausted);
  }
  SUBCASE("constants are infeasible") {
    CHECK(code_of([&] { sharpness_search(constant_family(), unit, 0, 2, cfg); }) == ErrorCode::InfeasibleFamily);
  }
  SUBCASE("power profiles approach K") {
    const Domain wide = Domain::interval(0, 200);
    const auto fam = power_profile_family(wide);
    SharpnessConfig s;
    double prev = 0;
    for (int budget : {125, 250, 500}) {
      s.budget = budget;
      const auto res = sharpness_search(fam, wide, 0, 2, cfg, s);
      INFO("budget ", budget, " best ", res.best_ratio);
      CHECK(res.best_ratio >= prev);
      CHECK(res.best_ratio <= res.K * (1 + res.tol_slack));
      CHECK(res.gap_to_K >= -res.tol_slack);
      CHECK(res.evaluations <= budget);
      prev = res.best_ratio;
    }
    CHECK(prev >= 1.9);
    // the optimum sits at the corner beta = 0.51, M = 100 of the box, where
    // ratio^2 = (1/(2b-1) + I) / (b^2/(2b-1) + 1/(M-1)), I = int_1^M ((M-t)/(M-1))^2 t^-2 dt
    const double b = 0.51, M = 100;
    const double I = (M * M * (1 - 1 / M) - 2 * M * std::log(M) + (M - 1)) / ((M - 1) * (M - 1));
    CHECK(prev == doctest::Approx(std::sqrt((1 / (2 * b - 1) + I) / (b * b / (2 * b - 1) + 1 / (M - 1)))).epsilon(1e-8));
  }
  SUBCASE("budget exhaustion is a flag") {
    const Domain wide = Domain::interval(0, 200);
    SharpnessConfig s;
    s.budget = 4;
    const auto res = sharpness_search(power_profile_family(wide), wide, 0, 2, cfg, s);
    CHECK(res.budget_exhausted);
    CHECK(res.evaluations == 4);
    CHECK(res.best_ratio > 1);
  }
}
