#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "hspw/error.hpp"
#include "hspw/field_library.hpp"
#include "hspw/grand_lebesgue.hpp"

using namespace hspw;

namespace {

const Domain unit = Domain::interval(0, 1);

ScalarField parabola() { return parse_field("poly:t*(1-t)", unit); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("p-grids") {
  const auto g = make_pgrid(1, 10, 5, 64);
  REQUIRE(g.points.size() == 5);
  CHECK(g.points.front() > 1);
  CHECK(g.points.back() < 10);
  CHECK_FALSE(g.capped);
  for (std::size_t i = 1; i < g.points.size(); ++i) CHECK(g.points[i] > g.points[i - 1]);
  // denser near the lower end
  CHECK(g.points[1] - g.points[0] < g.points[4] - g.points[3]);

  const auto inf = make_pgrid(1, kInf, 12, 64);
  CHECK(inf.capped);
  CHECK(inf.points.back() == doctest::Approx(64.0));
  for (double p : inf.points) CHECK(p <= 64.0);

  CHECK(code_of([] { make_pgrid(3, 2, 5, 64); }) == ErrorCode::EmptyGrid);
  CHECK(code_of([] { make_pgrid(70, kInf, 5, 64); }) == ErrorCode::EmptyGrid);
  CHECK(code_of([] { make_pgrid(1, 2, 1, 64); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("generating functions") {
  CHECK(GeneratingFunction::power(2)(9) == doctest::Approx(3.0));
  CHECK(GeneratingFunction::log_corrected(2, 1)(3) == doctest::Approx(std::sqrt(3.0) * std::log(4.0)));
  const auto l = GeneratingFunction::log_corrected(1, 0, [](double s) { return 1 + 1 / (1 + s); });
  CHECK(l(1) == doctest::Approx(1 + 1 / (1 + std::log(2.0))));
  const auto e = GeneratingFunction::extremal(2);
  CHECK(e(2) == 1.0);
  CHECK(std::isinf(e(2.5)));
  const auto t = GeneratingFunction::tabulated({{4, 2.0}, {2, 1.0}});
  CHECK(t(3) == doctest::Approx(1.5));
  CHECK(t(2) == 1.0);
  CHECK(std::isinf(t(5)));
  CHECK(t.upper() == 4.0);

  CHECK(code_of([] { GeneratingFunction::power(0); }) == ErrorCode::InvalidGeneratingFunction);
  CHECK(code_of([] { GeneratingFunction::tabulated({{2, -1.0}}); }) == ErrorCode::InvalidGeneratingFunction);
  CHECK(code_of([] { GeneratingFunction::extremal(0.5); }) == ErrorCode::InvalidGeneratingFunction);
  const auto bad_l = GeneratingFunction::log_corrected(1, 0, [](double) { return -1.0; });
  CHECK(code_of([&] { bad_l(2); }) == ErrorCode::InvalidGeneratingFunction);
}

TEST_CASE("psi_K") {
  const auto k = make_psi_K(GeneratingFunction::power(1), 0, 1);
  CHECK(k(2) == doctest::Approx(4.0));
  const auto ke = make_psi_K(GeneratingFunction::extremal(3), 0, 1);
  CHECK(ke(3) == doctest::Approx(1.5));
  CHECK(std::isinf(ke(2)));
  const auto psi = GeneratingFunction::power(2);
  const auto kp = make_psi_K(psi, 0, 2);
  CHECK(kp(1e6) / psi(1e6) == doctest::Approx(1.0).epsilon(1e-5));
  for (double p : {2.1, 3.0, 10.0}) CHECK(kp(p) > psi(p));
}

TEST_CASE("table psi from a file") {
  const char* path = "gls_psi_table.csv";
  {
    std::ofstream out(path);
    out << "p,psi\n2,1\n4,3\n";
  }
  const auto g = parse_generating_function(std::string("table:") + path, nullptr, unit, 0, {});
  CHECK(g(3) == doctest::Approx(2.0));
  std::remove(path);
  CHECK(code_of([] { parse_generating_function("table:/nonexistent.csv", nullptr, unit, 0, {}); }) ==
        ErrorCode::IoError);
  CHECK(code_of([] { parse_generating_function("natural", nullptr, unit, 0, {}); }) ==
        ErrorCode::InvalidGeneratingFunction);
  CHECK(code_of([] { parse_generating_function("weird:1", nullptr, unit, 0, {}); }) == ErrorCode::ParseError);
}

TEST_CASE("extremal psi reduces to the L_r norm") {
  QuadratureConfig cfg;
  const auto u = parabola();
  for (double r : {2.0, 3.5}) {
    const auto psi = GeneratingFunction::extremal(r);
    const auto res = gls_norm(u, unit, 0.5, psi, gls_pgrid(1, 0.5, psi, 8), cfg);
    const double direct = weighted_lp_norm(u, unit, 0.5, r, cfg).value;
    CHECK(res.value == doctest::Approx(direct).epsilon(1e-10));
    CHECK(res.argmax_p == r);
  }
}

TEST_CASE("natural psi makes the gradient's norm exactly one") {
  QuadratureConfig cfg;
  const auto sq = Domain::box(make_point({0, 0}), make_point({1, 1}));
  const auto u = parse_field("poly:x*(1-x)*y*(1-y)", sq);
  const auto psi = GeneratingFunction::natural(u, sq, 0.5, cfg);
  const auto res = gls_norm(gradient_magnitude(u, sq), sq, 0.5, psi, gls_pgrid(2, 0.5, psi, 10), cfg);
  CHECK(std::abs(res.value - 1.0) <= 1e-10);
  CHECK(gls_norm(zero_field(), unit, 0, GeneratingFunction::power(2), make_pgrid(1, kInf, 6), cfg).value == 0.0);
}

TEST_CASE("grid, psi and scaling monotonicity") {
  QuadratureConfig cfg;
  const auto u = parabola();
  const auto psi = GeneratingFunction::power(2);
  auto coarse = make_pgrid(1, kInf, 5);
  coarse.endpoint_refinement = 0;
  auto fine = coarse;
  for (double p : make_pgrid(1, kInf, 9).points) fine.points.push_back(p);
  std::sort(fine.points.begin(), fine.points.end());
  fine.points.erase(std::unique(fine.points.begin(), fine.points.end()), fine.points.end());
  CHECK(gls_norm(u, unit, 0, psi, fine, cfg).value >= gls_norm(u, unit, 0, psi, coarse, cfg).value);

  // p^{1/2} <= p for p >= 1
  const auto g = make_pgrid(1, kInf, 8);
  CHECK(gls_norm(u, unit, 0, GeneratingFunction::power(2), g, cfg).value >=
        gls_norm(u, unit, 0, GeneratingFunction::power(1), g, cfg).value);

  const double base = gls_norm(u, unit, 0, psi, g, cfg).value;
  for (double c : {-3.0, 0.25}) CHECK(gls_norm(scaled(u, c), unit, 0, psi, g, cfg).value == doctest::Approx(std::abs(c) * base).epsilon(1e-9));
}

TEST_CASE("refinement never reports less than the grid") {
  QuadratureConfig cfg;
  const auto u = parabola();
  const auto psi = GeneratingFunction::log_corrected(2, 1);
  auto g = make_pgrid(1, kInf, 6);
  const auto refined = gls_norm(u, unit, 0, psi, g, cfg);
  g.endpoint_refinement = 0;
  const auto plain = gls_norm(u, unit, 0, psi, g, cfg);
  CHECK(refined.value >= plain.value);
  CHECK_FALSE(plain.refined);
}

TEST_CASE("divergent norms surface as GlsDivergent") {
  QuadratureConfig cfg;
  const auto one = parse_field("poly:1", unit);
  const auto t = apply_hardy_operator(one, unit);
  try {
    gls_norm(t, unit, 0, GeneratingFunction::power(2), make_pgrid(1, kInf, 4), cfg);
    FAIL("no exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GlsDivergent);
    CHECK(std::string(e.what()).find("p = ") != std::string::npos);
  }
}

TEST_CASE("grand Lebesgue comparison on the parabola with natural psi") {
  QuadratureConfig cfg;
  const auto u = parabola();
  const auto psi = GeneratingFunction::natural(u, unit, 0, cfg);
  const auto rep = check_theorem_2_1(u, unit, 0, psi, gls_pgrid(1, 0, psi, 12), cfg);
  CHECK(rep.rhs.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.lhs.value <= 1.0);
  CHECK(rep.pass);
  CHECK(rep.certificate_pass);
  CHECK(rep.certificate.size() == 12);
  // per-p oracle: Hardy ratio / K(p)
  for (const auto& row : rep.certificate) {
    const double hardy = distance_weighted_norm(u, unit, row.p, row.p, cfg).value /
                         gradient_lp_norm(u, unit, 0, row.p, cfg).value;
    CHECK(row.lhs_ratio == doctest::Approx(hardy * (row.p - 1) / row.p).epsilon(1e-6));
  }
}

TEST_CASE("grand Lebesgue comparison, degenerate and near-extremal cases") {
  QuadratureConfig cfg;
  const auto psi = GeneratingFunction::power(2);
  const auto zero = check_theorem_2_1(zero_field(), unit, 0, psi, make_pgrid(1, kInf, 4), cfg);
  CHECK(zero.vacuous);
  CHECK(zero.pass);

  // power profile concentrating at the boundary: ratio approaches 1 from below
  const auto line = Domain::interval(0, 200);
  const auto e2 = GeneratingFunction::extremal(2);
  double prev = 0;
  for (double beta : {0.9, 0.7, 0.55}) {
    const auto u = power_profile_field(line, beta, 100);
    const auto rep = check_theorem_2_1(u, line, 0, e2, make_pgrid(1, kInf, 3), cfg);
    CHECK(rep.pass);
    CHECK(rep.ratio < 1.0);
    CHECK(rep.ratio > prev);
    prev = rep.ratio;
  }
  CHECK(prev > 0.9);
}
