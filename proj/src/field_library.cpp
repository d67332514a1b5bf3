#include "hspw/field_library.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>

#include "hspw/error.hpp"

namespace hspw {

namespace {

double parse_number(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw Error(ErrorCode::ParseError, "cannot read " + std::string(what) + " from '" + std::string(text) + "'");
  return v;
}

/// u = phi(d(x)) with gradient phi'(d) grad d.
template <class Phi, class DPhi>
ScalarField distance_profile(const Domain& dom, Phi phi, DPhi dphi) {
  ScalarField u;
  u.value = [dom, phi](const Point& x) { return phi(distance_to_boundary(dom, x)); };
  u.gradient = [dom, dphi](const Point& x) {
    return Point(dphi(distance_to_boundary(dom, x)) * distance_gradient(dom, x));
  };
  return u;
}

}  // namespace

ScalarField expression_field(const Expression& expr, int dim) {
  if (expr.arity() > dim) {
    std::ostringstream os;
    os << "expression '" << expr.text() << "' uses " << expr.arity() << " coordinates, domain has " << dim;
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
  ScalarField u;
  u.value = [expr](const Point& x) { return expr(x); };
  u.gradient = [expr](const Point& x) {
    Point g;
    expr.value_and_gradient(x, g);
    return g;
  };
  u.name = "poly:" + expr.text();
  return u;
}

ScalarField bump_field(const Domain& dom) {
  const Point c = dom.interior_point();
  double rho = 0.9 * distance_to_boundary(dom, c);
  // keep the support box inside the truncation box of unbounded shapes
  const AxisBox& bb = dom.bounding_box();
  for (int i = 0; i < dom.dim(); ++i) rho = std::min({rho, 0.9 * (c(i) - bb.lo(i)), 0.9 * (bb.hi(i) - c(i))});
  ScalarField u;
  u.value = [c, rho](const Point& x) {
    const double q = (x - c).squaredNorm() / (rho * rho);
    return q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
  };
  u.gradient = [c, rho](const Point& x) {
    const double q = (x - c).squaredNorm() / (rho * rho);
    if (q >= 1.0) return Point(Point::Zero(x.size()));
    const double v = std::exp(1.0 - 1.0 / (1.0 - q));
    return Point(-v / ((1.0 - q) * (1.0 - q)) * 2.0 * (x - c) / (rho * rho));
  };
  u.support = AxisBox{Point(c.array() - rho), Point(c.array() + rho)};
  u.vanishes_near_boundary = true;
  u.name = "bump";
  return u;
}

ScalarField distance_power_field(const Domain& dom, double beta) {
  auto u = distance_profile(
      dom, [beta](double s) { return std::pow(s, beta); },
      [beta](double s) { return beta * std::pow(s, beta - 1.0); });
  u.vanishes_near_boundary = beta > 0;
  u.name = "power:" + std::to_string(beta);
  return u;
}

ScalarField power_profile_field(const Domain& dom, double beta, double cutoff) {
  if (!(cutoff > 1.0)) throw Error(ErrorCode::InvalidConfig, "profile cutoff M must exceed 1");
  const double m = cutoff;
  auto u = distance_profile(
      dom,
      [beta, m](double s) {
        if (s <= 1.0) return std::pow(s, beta);
        return s < m ? (m - s) / (m - 1.0) : 0.0;
      },
      [beta, m](double s) {
        if (s <= 1.0) return beta * std::pow(s, beta - 1.0);
        return s < m ? -1.0 / (m - 1.0) : 0.0;
      });
  u.distance_breakpoints = {1.0, m};
  u.vanishes_near_boundary = beta > 0;
  std::ostringstream os;
  os << "profile:" << beta << "," << m;
  u.name = os.str();
  return u;
}

ScalarField parse_field(std::string_view spec, const Domain& dom) {
  const auto colon = spec.find(':');
  const std::string_view head = spec.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);

  if (spec == "zero") return zero_field();
  if (spec == "bump") return bump_field(dom);
  if (spec == "distance") {
    auto u = distance_power_field(dom, 1.0);
    u.name = "distance";
    return u;
  }
  if (head == "poly" || head == "expr") return expression_field(Expression::parse(arg), dom.dim());
  if (head == "power") return distance_power_field(dom, parse_number(arg, "power exponent"));
  if (head == "profile") {
    const auto comma = arg.find(',');
    if (comma == std::string_view::npos) throw Error(ErrorCode::ParseError, "profile needs 'beta,M'");
    return power_profile_field(dom, parse_number(arg.substr(0, comma), "profile beta"),
                               parse_number(arg.substr(comma + 1), "profile cutoff"));
  }
  throw Error(ErrorCode::ParseError, "unknown field '" + std::string(spec) + "'");
}

}  // namespace hspw
