#include <cmath>
#include <random>

#include "doctest.h"
#include "hspw/error.hpp"
#include "hspw/field.hpp"
#include "hspw/field_library.hpp"

using namespace hspw;

namespace {

const Domain unit = Domain::interval(0, 1);

ScalarField parabola() { return parse_field("poly:t*(1-t)", unit); }

ScalarField without_gradient(ScalarField u) {
  u.gradient = nullptr;
  return u;
}

}  // namespace

TEST_CASE("gradient_at") {
  CHECK(gradient_at(parabola(), make_point({0.25}), unit)(0) == doctest::Approx(0.5));
  CHECK(gradient_at(without_gradient(parabola()), make_point({0.25}), unit)(0) == doctest::Approx(0.5).epsilon(1e-8));
  const auto sq = Domain::box(make_point({0, 0}), make_point({4, 4}));
  CHECK(gradient_at(parse_field("poly:7", sq), make_point({1, 1}), sq).isZero());
  const Point g = gradient_at(parse_field("poly:x*y", sq), make_point({2, 3}), sq);
  CHECK(g(0) == 3.0);
  CHECK(g(1) == 2.0);
  // one-sided stencil right next to the boundary
  const double near = 1e-7;
  CHECK(gradient_at(without_gradient(parabola()), make_point({near}), unit)(0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK_THROWS_AS(gradient_at(parabola(), make_point({1.5}), unit), Error);
}

TEST_CASE("declared and finite-difference gradients agree on polynomials") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const auto sq = Domain::box(make_point({0, 0}), make_point({1, 1}));
  for (const char* spec : {"poly:x*y*(1-x)", "poly:(x*(1-x)*y*(1-y))^2", "poly:3*x^3 - 2*y^2 + x*y"}) {
    const auto f = parse_field(spec, sq);
    const auto fd = without_gradient(f);
    for (int i = 0; i < 50; ++i) {
      const Point x = make_point({u(rng), u(rng)});
      const Point a = gradient_at(f, x, sq), b = gradient_at(fd, x, sq);
      CHECK((a - b).norm() <= 1e-5 * std::max(a.norm(), 1e-3));
    }
  }
}

TEST_CASE("Hardy operator") {
  const auto t = apply_hardy_operator(parabola(), unit);
  CHECK(t(make_point({0.25})) == doctest::Approx(0.75));
  CHECK(apply_hardy_operator(zero_field(), unit)(make_point({0.3})) == 0.0);
  const auto d = apply_hardy_operator(parse_field("distance", unit), unit);
  for (double x : {0.01, 0.3, 0.5, 0.77}) CHECK(d(make_point({x})) == doctest::Approx(1.0));
  CHECK_THROWS_AS(t(make_point({0.0})), Error);
  // analytic gradient of T[u] against differences
  const Point x = make_point({0.3});
  const double h = 1e-6;
  const double fd = (t(make_point({0.3 + h})) - t(make_point({0.3 - h}))) / (2 * h);
  CHECK(t.gradient(x)(0) == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("closed-form norms") {
  QuadratureConfig cfg;
  CHECK(weighted_lp_norm(parabola(), unit, 0, 2, cfg).value == doctest::Approx(std::sqrt(1.0 / 30)).epsilon(1e-9));
  CHECK(weighted_lp_norm(zero_field(), unit, 0, 2, cfg).value == 0.0);
  CHECK(gradient_lp_norm(parabola(), unit, 0, 2, cfg).value == doctest::Approx(std::sqrt(1.0 / 3)).epsilon(1e-9));
  CHECK(gradient_lp_norm(parse_field("poly:5", unit), unit, 0, 2, cfg).value == 0.0);
  // |grad x1| = 1 on a box of volume 3
  const auto box = Domain::box(make_point({0, 0}), make_point({2, 1.5}));
  CHECK(gradient_lp_norm(parse_field("poly:x", box), box, 0, 2, cfg).value == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
  // weight power 1 is outside mu_alpha (alpha < n) but fine as a distance power
  CHECK_THROWS_AS(weighted_lp_norm(parabola(), unit, 1, 1, cfg), Error);
  CHECK(distance_weighted_norm(parabola(), unit, 1, 1, cfg).value == doctest::Approx(0.75).epsilon(1e-9));
  CHECK_THROWS_AS(weighted_lp_norm(parabola(), unit, 0, 0.5, cfg), Error);
}

TEST_CASE("Sobolev norm conventions") {
  QuadratureConfig cfg;
  CHECK(sobolev_norm(zero_field(), unit, 2, cfg) == 0.0);
  CHECK(sobolev_norm(parabola(), unit, 2, cfg) == doctest::Approx(0.9424098714866479).epsilon(1e-9));
  CHECK(sobolev_norm(parabola(), unit, 2, cfg, SobolevConvention::Standard) ==
        doctest::Approx(std::sqrt(1.0 / 3) + std::sqrt(1.0 / 30)).epsilon(1e-9));
  const auto box = Domain::box(make_point({0, 0}), make_point({1, 1}));
  CHECK(sobolev_norm(parse_field("poly:x", box), box, 1, cfg) == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("homogeneity") {
  QuadratureConfig cfg;
  const auto disk = Domain::ball(make_point({0, 0}), 1);
  const auto u = parse_field("poly:(1 - x^2 - y^2)^2", disk);
  const auto base = weighted_lp_norm(u, disk, 0.5, 3, cfg);
  for (double c : {-2.0, 0.5, 10.0}) {
    const auto scaled_norm = weighted_lp_norm(scaled(u, c), disk, 0.5, 3, cfg);
    CHECK(scaled_norm.value == doctest::Approx(std::abs(c) * base.value).epsilon(1e-8));
  }
}

TEST_CASE("T[u] in L_p(mu_alpha) equals the direct left side") {
  QuadratureConfig cfg;
  struct Case {
    Domain dom;
    const char* field;
    double alpha, p;
  };
  const Case cases[] = {
      {unit, "poly:t*(1-t)", 0.0, 2.0},
      {unit, "poly:t*(1-t)", 0.5, 1.5},
      {Domain::box(make_point({0, 0}), make_point({1, 1})), "poly:x*(1-x)*y*(1-y)", 0.5, 2.0},
      {Domain::ball(make_point({0, 0}), 1), "poly:(1-x^2-y^2)^2", 1.5, 2.0},
  };
  for (const auto& c : cases) {
    const auto u = parse_field(c.field, c.dom);
    const auto route_a = weighted_lp_norm(apply_hardy_operator(u, c.dom), c.dom, c.alpha, c.p, cfg);
    const auto route_b = distance_weighted_norm(u, c.dom, c.p + c.alpha, c.p, cfg);
    CHECK(route_a.converged);
    CHECK(route_b.converged);
    CHECK(route_a.value == doctest::Approx(route_b.value).epsilon(1e-7));
  }
}

TEST_CASE("layer cake on the parabola") {
  QuadratureConfig cfg;
  const auto u = parabola();
  // int_0^{1/4} T(s) ds by the trapezoid rule on a level grid
  const int m = 200;
  double integral = 0;
  double prev = tail_function(u, unit, 0, 0, cfg);
  CHECK(prev == doctest::Approx(1.0));
  for (int k = 1; k <= m; ++k) {
    const double cur = tail_function(u, unit, 0, 0.25 * k / m, cfg);
    CHECK(cur <= prev + 1e-12);
    integral += 0.5 * (prev + cur) * 0.25 / m;
    prev = cur;
  }
  CHECK(std::abs(integral - 1.0 / 6) <= 0.01 / 6);
}

TEST_CASE("field library") {
  const auto disk = Domain::ball(make_point({0, 0}), 1);
  const auto b = parse_field("bump", disk);
  REQUIRE(b.support);
  CHECK(b(make_point({0, 0})) == doctest::Approx(1.0));
  CHECK(b(make_point({0.95, 0})) == 0.0);
  CHECK(b.vanishes_near_boundary);

  const auto prof = parse_field("profile:0.75,4", Domain::interval(0, 20));
  CHECK(prof.distance_breakpoints == std::vector<double>{1.0, 4.0});
  CHECK(prof(make_point({0.5})) == doctest::Approx(std::pow(0.5, 0.75)));
  CHECK(prof(make_point({2.0})) == doctest::Approx(2.0 / 3));
  CHECK(prof(make_point({10.0})) == 0.0);
  CHECK(prof(make_point({19.5})) == doctest::Approx(std::pow(0.5, 0.75)));
  CHECK(prof.gradient(make_point({19.5}))(0) == doctest::Approx(-0.75 * std::pow(0.5, -0.25)));

  CHECK(parse_field("power:0.5", unit)(make_point({0.25})) == doctest::Approx(0.5));

  auto code_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  CHECK(code_of([] { parse_field("nope", unit); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_field("poly:x*y", unit); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([] { parse_field("power:abc", unit); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_field("profile:0.6,0.5", unit); }) == ErrorCode::InvalidConfig);
}
