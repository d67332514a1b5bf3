#include "hspw/field.hpp"

#include <cmath>
#include <sstream>

#include "hspw/error.hpp"

namespace hspw {

namespace {

void check_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    std::ostringstream os;
    os << "p = " << p << " must lie in [1, inf)";
    throw Error(ErrorCode::InvalidP, os.str());
  }
}

NormValue to_norm(const IntegralResult& r, double p, double alpha) {
  NormValue n;
  n.p = p;
  n.alpha = alpha;
  n.divergent_flag = r.divergent_flag;
  n.converged = r.converged;
  if (r.divergent_flag) {
    n.value = std::numeric_limits<double>::infinity();
    n.error_estimate = std::numeric_limits<double>::infinity();
    return n;
  }
  const double integral = std::max(r.value, 0.0);
  n.value = std::pow(integral, 1.0 / p);
  // first-order propagation through I -> I^{1/p}
  if (integral > 0)
    n.error_estimate = n.value / (p * integral) * r.error_estimate;
  else
    n.error_estimate = std::pow(r.error_estimate, 1.0 / p);
  return n;
}

}  // namespace

ScalarField zero_field() {
  ScalarField z;
  z.value = [](const Point&) { return 0.0; };
  z.gradient = [](const Point& x) { return Point(Point::Zero(x.size())); };
  z.vanishes_near_boundary = true;
  z.name = "zero";
  return z;
}

ScalarField scaled(const ScalarField& u, double c) {
  ScalarField s = u;
  s.value = [f = u.value, c](const Point& x) { return c * f(x); };
  if (u.gradient) s.gradient = [g = u.gradient, c](const Point& x) { return Point(c * g(x)); };
  s.name = std::to_string(c) + "*" + u.name;
  return s;
}

Point gradient_at(const ScalarField& u, const Point& x, const Domain& dom) {
  if (x.size() != dom.dim()) throw Error(ErrorCode::DimensionMismatch, "point and domain dimensions differ");
  if (!contains(dom, x)) throw Error(ErrorCode::PointOutsideDomain, "gradient requested outside the open domain");
  if (u.gradient) return u.gradient(x);

  const int n = dom.dim();
  Point g(n);
  const double fx = u.value(x);
  for (int i = 0; i < n; ++i) {
    double h = std::max(1e-6, 1e-6 * x.norm());
    for (;;) {
      Point fwd = x, bwd = x;
      fwd(i) += h;
      bwd(i) -= h;
      const bool f_in = contains(dom, fwd), b_in = contains(dom, bwd);
      if (f_in && b_in) {
        g(i) = (u.value(fwd) - u.value(bwd)) / (2 * h);
        break;
      }
      if (f_in) {
        g(i) = (u.value(fwd) - fx) / h;
        break;
      }
      if (b_in) {
        g(i) = (fx - u.value(bwd)) / h;
        break;
      }
      h *= 0.5;
    }
  }
  return g;
}

ScalarField apply_hardy_operator(const ScalarField& u, const Domain& dom) {
  ScalarField t;
  t.value = [f = u.value, dom](const Point& x) { return f(x) / distance_to_boundary(dom, x); };
  if (u.gradient) {
    t.gradient = [f = u.value, g = u.gradient, dom](const Point& x) {
      const double d = distance_to_boundary(dom, x);
      return Point((g(x) * d - f(x) * distance_gradient(dom, x)) / (d * d));
    };
  }
  t.support = u.support;
  t.distance_breakpoints = u.distance_breakpoints;
  t.name = "T[" + u.name + "]";
  return t;
}

ScalarField gradient_magnitude(const ScalarField& u, const Domain& dom) {
  ScalarField m;
  m.value = [u, dom](const Point& x) { return gradient_at(u, x, dom).norm(); };
  m.support = u.support;
  m.distance_breakpoints = u.distance_breakpoints;
  m.name = "|grad " + u.name + "|";
  return m;
}

Integrand power_integrand(const ScalarField& u, double p) {
  Integrand f;
  if (p == 1.0)
    f.eval = [v = u.value](const Point& x) { return std::abs(v(x)); };
  else if (p == 2.0)
    f.eval = [v = u.value](const Point& x) {
      const double y = v(x);
      return y * y;
    };
  else
    f.eval = [v = u.value, p](const Point& x) { return std::pow(std::abs(v(x)), p); };
  f.support = u.support;
  f.distance_breakpoints = u.distance_breakpoints;
  return f;
}

NormValue weighted_lp_norm(const ScalarField& u, const Domain& dom, double alpha, double p,
                           const QuadratureConfig& cfg) {
  check_p(p);
  return to_norm(integrate_weighted(power_integrand(u, p), dom, alpha, cfg), p, alpha);
}

NormValue distance_weighted_norm(const ScalarField& u, const Domain& dom, double exponent, double p,
                                 const QuadratureConfig& cfg) {
  check_p(p);
  return to_norm(integrate_distance_power(power_integrand(u, p), dom, exponent, cfg), p, exponent);
}

NormValue gradient_lp_norm(const ScalarField& u, const Domain& dom, double alpha, double p,
                           const QuadratureConfig& cfg) {
  return weighted_lp_norm(gradient_magnitude(u, dom), dom, alpha, p, cfg);
}

double sobolev_norm(const ScalarField& u, const Domain& dom, double p, const QuadratureConfig& cfg,
                    SobolevConvention convention) {
  const double grad = gradient_lp_norm(u, dom, 0.0, p, cfg).value;
  const double val = weighted_lp_norm(u, dom, 0.0, p, cfg).value;
  return (convention == SobolevConvention::Paper ? std::pow(grad, 1.0 / p) : grad) + val;
}

double tail_function(const ScalarField& u, const Domain& dom, double alpha, double level,
                     const QuadratureConfig& cfg) {
  Integrand f;
  f.eval = u.value;
  f.support = u.support;
  f.distance_breakpoints = u.distance_breakpoints;
  return measure_of_superlevel(dom, alpha, f, level, cfg).value;
}

}  // namespace hspw
