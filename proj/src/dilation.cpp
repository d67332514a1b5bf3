#include "hspw/dilation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hspw/error.hpp"
#include "hspw/numerics.hpp"
#include "hspw/parallel.hpp"

namespace hspw {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void require_lambda(double lambda) {
  if (!(lambda > 0) || !std::isfinite(lambda))
    throw Error(ErrorCode::NonpositiveLambda, "dilation needs a finite lambda > 0, got " + fmt(lambda));
}

const HalfSpaceProduct& require_halfspace(const Domain& dom, int dim) {
  const auto* hs = std::get_if<HalfSpaceProduct>(&dom.shape());
  if (!hs) throw Error(ErrorCode::InvalidConfig, "product fields live on half-space products, got " + dom.kind());
  if (dim != dom.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "product field has " + std::to_string(dim) + " factors, domain has dimension " +
                                                  std::to_string(dom.dim()));
  }
  return *hs;
}

void require_inside(const AxisBox& support, const HalfSpaceProduct& hs) {
  const auto& t = hs.truncation;
  for (int i = 0; i < support.dim(); ++i) {
    if (support.lo(i) < t.lo(i) || support.hi(i) > t.hi(i)) {
      std::ostringstream os;
      os << "support [" << support.lo(i) << ", " << support.hi(i) << "] on axis " << i << " leaves the truncation box ["
         << t.lo(i) << ", " << t.hi(i) << "]";
      throw Error(ErrorCode::SupportEscapesDomain, os.str());
    }
  }
}

bool factorizable(const ProductField& u, const HalfSpaceProduct& hs, bool gradient, double p) {
  if (hs.positive_dims != 1) return false;
  if (gradient && p != 2.0) return false;
  // the weight must stay smooth on the positive factor's support
  return u.factors.back().lo > 0;
}

ProductPath resolve(ProductPath path, const ProductField& u, const HalfSpaceProduct& hs, bool gradient, double p) {
  const bool ok = factorizable(u, hs, gradient, p);
  if (path == ProductPath::Factorized && !ok) {
    throw Error(ErrorCode::InvalidConfig,
                "factorized path needs r = 1, a positive factor away from y = 0" + std::string(gradient ? " and p = 2" : ""));
  }
  if (path == ProductPath::Auto) path = ok ? ProductPath::Factorized : ProductPath::Generic;
  if (path == ProductPath::Generic && u.dim() > 3) {
    throw Error(ErrorCode::DimensionUnsupported,
                "n = " + std::to_string(u.dim()) + " needs the factorized path (r = 1" + (gradient ? ", p = 2)" : ")"));
  }
  return path;
}

struct Factored {
  double value = 0.0;
  double rel_error = 0.0;
  bool converged = true;
};

// int g(t) w(t) over the factor's support, w = t^{-power} on the positive axis
Factored factor_integral(const Factor& f, const std::function<double(double)>& g, bool positive, double power,
                         const QuadratureConfig& cfg) {
  auto integrand = [&](double t) { return positive && power != 0.0 ? g(t) * std::pow(t, -power) : g(t); };
  const IntegralResult r = integrate_segment(integrand, f.lo, f.hi, cfg);
  return {r.value, r.value != 0.0 ? r.error_estimate / std::abs(r.value) : 0.0, r.converged};
}

NormValue to_norm_value(const Factored& total, double p, double weight) {
  NormValue n;
  n.p = p;
  n.alpha = weight;
  n.value = std::pow(std::max(total.value, 0.0), 1.0 / p);
  n.error_estimate = n.value * total.rel_error / p;
  n.converged = total.converged;
  return n;
}

NormValue factorized_L(const ProductField& u, double a, double q, const QuadratureConfig& cfg) {
  Factored prod{1.0, 0.0, true};
  for (int i = 0; i < u.dim(); ++i) {
    const Factor& f = u.factors[static_cast<std::size_t>(i)];
    const auto r = factor_integral(f, [&](double t) { return std::pow(std::abs(f.value(t)), q); }, i == u.dim() - 1, a, cfg);
    prod.value *= r.value;
    prod.rel_error += r.rel_error;
    prod.converged = prod.converged && r.converged;
  }
  return to_norm_value(prod, q, a);
}

// |grad u|^2 = sum_i f_i'^2 prod_{j != i} f_j^2
NormValue factorized_R2(const ProductField& u, double h, const QuadratureConfig& cfg) {
  const int n = u.dim();
  std::vector<Factored> plain, slope;
  for (int i = 0; i < n; ++i) {
    const Factor& f = u.factors[static_cast<std::size_t>(i)];
    const bool pos = i == n - 1;
    plain.push_back(factor_integral(f, [&](double t) { return f.value(t) * f.value(t); }, pos, h, cfg));
    slope.push_back(factor_integral(f, [&](double t) { return f.derivative(t) * f.derivative(t); }, pos, h, cfg));
  }
  CompensatedSum<double> total, err;
  bool converged = true;
  for (int i = 0; i < n; ++i) {
    double term = slope[static_cast<std::size_t>(i)].value;
    double rel = slope[static_cast<std::size_t>(i)].rel_error;
    converged = converged && slope[static_cast<std::size_t>(i)].converged && plain[static_cast<std::size_t>(i)].converged;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      term *= plain[static_cast<std::size_t>(j)].value;
      rel += plain[static_cast<std::size_t>(j)].rel_error;
    }
    total += term;
    err += std::abs(term) * rel;
  }
  const double sum = total.value();
  return to_norm_value({sum, sum != 0.0 ? err.value() / std::abs(sum) : 0.0, converged}, 2.0, h);
}

}  // namespace

void ExponentConfig::validate() const {
  if (!(p >= 1) || !std::isfinite(p)) throw Error(ErrorCode::InvalidP, "p = " + fmt(p) + " must lie in [1, inf)");
  if (!(q >= 1) || !std::isfinite(q)) throw Error(ErrorCode::InvalidP, "q = " + fmt(q) + " must lie in [1, inf)");
  if (!std::isfinite(a) || !std::isfinite(h)) throw Error(ErrorCode::InvalidConfig, "a and h must be finite");
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "n must be >= 1");
  const bool split = free_dims != 0 || positive_dims != 0;
  if (split && (free_dims < 1 || positive_dims < 1 || free_dims + positive_dims != n)) {
    throw Error(ErrorCode::DimensionMismatch, "split d = " + std::to_string(free_dims) + ", r = " +
                                                  std::to_string(positive_dims) + " must have d, r > 0 and d + r = n = " +
                                                  std::to_string(n));
  }
}

std::string_view to_string(Unknown u) {
  switch (u) {
    case Unknown::A: return "a";
    case Unknown::H: return "h";
    case Unknown::P: return "p";
    case Unknown::Q: return "q";
  }
  return "?";
}

ExponentSolution exponent_relation(const ExponentConfig& ecfg, std::optional<Unknown> solve_for) {
  // the unknown itself is not validated: it is about to be replaced
  ExponentConfig check = ecfg;
  if (solve_for == Unknown::P) check.p = 1.0;
  if (solve_for == Unknown::Q) check.q = 1.0;
  check.validate();

  const double n = ecfg.n;
  ExponentSolution out;
  out.config = ecfg;
  auto residual = [n](const ExponentConfig& c) { return (c.a - n) / c.q - 1.0 - (c.h - n) / c.p; };
  if (solve_for != Unknown::P && solve_for != Unknown::Q) out.residual = residual(ecfg);
  if (!solve_for) return out;

  auto in_range = [](double v, const char* name) {
    if (!(v >= 1.0) || !std::isfinite(v))
      throw Error(ErrorCode::NoSolution, std::string(name) + " = " + fmt(v) + " is outside [1, inf)");
    return v;
  };
  double v = 0.0;
  switch (*solve_for) {
    case Unknown::A: v = n + ecfg.q * (1.0 + (ecfg.h - n) / ecfg.p); break;
    case Unknown::H: v = n + ecfg.p * ((ecfg.a - n) / ecfg.q - 1.0); break;
    case Unknown::Q: {
      const double den = 1.0 + (ecfg.h - n) / ecfg.p;
      if (den == 0.0) throw Error(ErrorCode::NoSolution, "relation does not involve q when 1 + (h - n)/p = 0");
      v = in_range((ecfg.a - n) / den, "q");
      break;
    }
    case Unknown::P: {
      const double den = (ecfg.a - n) / ecfg.q - 1.0;
      if (den == 0.0) throw Error(ErrorCode::NoSolution, "relation does not involve p when (a - n)/q = 1");
      v = in_range((ecfg.h - n) / den, "p");
      break;
    }
  }
  out.solved = solve_for;
  out.value = v;
  switch (*solve_for) {
    case Unknown::A: out.config.a = v; break;
    case Unknown::H: out.config.h = v; break;
    case Unknown::P: out.config.p = v; break;
    case Unknown::Q: out.config.q = v; break;
  }
  out.residual = residual(out.config);
  return out;
}

ScalarField dilate(const ScalarField& u, double lambda) {
  require_lambda(lambda);
  ScalarField v;
  v.value = [f = u.value, lambda](const Point& x) { return f(Point(lambda * x)); };
  if (u.gradient)
    v.gradient = [g = u.gradient, lambda](const Point& x) { return Point(lambda * g(Point(lambda * x))); };
  if (u.support) v.support = AxisBox{Point(u.support->lo / lambda), Point(u.support->hi / lambda)};
  for (double b : u.distance_breakpoints) v.distance_breakpoints.push_back(b / lambda);
  v.vanishes_near_boundary = u.vanishes_near_boundary;
  v.name = lambda == 1.0 ? u.name : "V(" + fmt(lambda) + ")" + u.name;
  return v;
}

Factor poly_bump_factor(double lo, double hi, int power) {
  if (!(lo < hi) || power < 1) throw Error(ErrorCode::InvalidConfig, "poly bump needs lo < hi and power >= 1");
  Factor f;
  f.lo = lo;
  f.hi = hi;
  f.value = [lo, hi, power](double t) { return t <= lo || t >= hi ? 0.0 : std::pow((t - lo) * (hi - t), power); };
  f.derivative = [lo, hi, power](double t) {
    if (t <= lo || t >= hi) return 0.0;
    return power * std::pow((t - lo) * (hi - t), power - 1) * (hi + lo - 2.0 * t);
  };
  f.name = "polybump(" + fmt(lo) + "," + fmt(hi) + ";" + std::to_string(power) + ")";
  return f;
}

Factor smooth_bump_factor(double lo, double hi) {
  if (!(lo < hi)) throw Error(ErrorCode::InvalidConfig, "smooth bump needs lo < hi");
  const double c = 0.5 * (lo + hi), w = 0.5 * (hi - lo);
  Factor f;
  f.lo = lo;
  f.hi = hi;
  f.value = [c, w](double t) {
    const double z = (t - c) / w;
    return std::abs(z) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - z * z)) : 0.0;
  };
  f.derivative = [c, w](double t) {
    const double z = (t - c) / w;
    if (!(std::abs(z) < 1.0)) return 0.0;
    const double m = 1.0 - z * z;
    return std::exp(1.0 - 1.0 / m) * (-2.0 * z / (m * m)) / w;
  };
  f.name = "bump(" + fmt(lo) + "," + fmt(hi) + ")";
  return f;
}

Factor dilate(const Factor& f, double lambda) {
  require_lambda(lambda);
  Factor g;
  g.lo = f.lo / lambda;
  g.hi = f.hi / lambda;
  g.value = [v = f.value, lambda](double t) { return v(lambda * t); };
  g.derivative = [d = f.derivative, lambda](double t) { return lambda * d(lambda * t); };
  g.name = lambda == 1.0 ? f.name : "V(" + fmt(lambda) + ")" + f.name;
  return g;
}

AxisBox ProductField::support() const {
  AxisBox b{Point(dim()), Point(dim())};
  for (int i = 0; i < dim(); ++i) {
    b.lo(i) = factors[static_cast<std::size_t>(i)].lo;
    b.hi(i) = factors[static_cast<std::size_t>(i)].hi;
  }
  return b;
}

ScalarField ProductField::field() const {
  ScalarField u;
  u.value = [fs = factors](const Point& x) {
    double v = 1.0;
    for (std::size_t i = 0; i < fs.size() && v != 0.0; ++i) v *= fs[i].value(x(static_cast<Eigen::Index>(i)));
    return v;
  };
  u.gradient = [fs = factors](const Point& x) {
    const std::size_t n = fs.size();
    std::vector<double> v(n), dv(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = fs[i].value(x(static_cast<Eigen::Index>(i)));
      dv[i] = fs[i].derivative(x(static_cast<Eigen::Index>(i)));
    }
    Point g(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      double c = dv[i];
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) c *= v[j];
      g(static_cast<Eigen::Index>(i)) = c;
    }
    return g;
  };
  u.support = support();
  u.vanishes_near_boundary = true;
  std::string name;
  for (const auto& f : factors) name += (name.empty() ? "" : "*") + f.name;
  u.name = name;
  return u;
}

ProductField dilate(const ProductField& u, double lambda) {
  require_lambda(lambda);
  ProductField v;
  for (const auto& f : u.factors) v.factors.push_back(dilate(f, lambda));
  return v;
}

NormValue functional_L(const ScalarField& u, const Domain& dom, double a, double q, const QuadratureConfig& cfg) {
  if (!(q >= 1)) throw Error(ErrorCode::InvalidP, "L needs q >= 1, got " + fmt(q));
  return distance_weighted_norm(u, dom, a, q, cfg);
}

NormValue functional_R(const ScalarField& u, const Domain& dom, double h, double p, const QuadratureConfig& cfg) {
  if (!(p >= 1)) throw Error(ErrorCode::InvalidP, "R needs p >= 1, got " + fmt(p));
  ScalarField g = gradient_magnitude(u, dom);
  g.support = u.support;
  g.distance_breakpoints = u.distance_breakpoints;
  return distance_weighted_norm(g, dom, h, p, cfg);
}

NormValue functional_L(const ProductField& u, const Domain& dom, double a, double q, const QuadratureConfig& cfg,
                       ProductPath path) {
  if (!(q >= 1)) throw Error(ErrorCode::InvalidP, "L needs q >= 1, got " + fmt(q));
  const auto& hs = require_halfspace(dom, u.dim());
  require_inside(u.support(), hs);
  if (resolve(path, u, hs, false, q) == ProductPath::Factorized) return factorized_L(u, a, q, cfg);
  return functional_L(u.field(), dom, a, q, cfg);
}

NormValue functional_R(const ProductField& u, const Domain& dom, double h, double p, const QuadratureConfig& cfg,
                       ProductPath path) {
  if (!(p >= 1)) throw Error(ErrorCode::InvalidP, "R needs p >= 1, got " + fmt(p));
  const auto& hs = require_halfspace(dom, u.dim());
  require_inside(u.support(), hs);
  if (resolve(path, u, hs, true, p) == ProductPath::Factorized) return factorized_R2(u, h, cfg);
  return functional_R(u.field(), dom, h, p, cfg);
}

std::vector<double> default_lambda_grid() {
  std::vector<double> g;
  for (int k = -4; k <= 4; ++k) g.push_back(std::exp2(0.75 * k));
  return g;
}

DilationReport verify_scaling_laws(const ProductField& u, const Domain& dom, const ExponentConfig& ecfg,
                                   const std::vector<double>& lambdas, const QuadratureConfig& cfg, ProductPath path) {
  ecfg.validate();
  const auto& hs = require_halfspace(dom, u.dim());
  if (ecfg.n != dom.dim() || ecfg.free_dims != hs.free_dims || ecfg.positive_dims != hs.positive_dims) {
    throw Error(ErrorCode::DimensionMismatch, "exponent config split (" + std::to_string(ecfg.free_dims) + ", " +
                                                  std::to_string(ecfg.positive_dims) + ") does not match the domain (" +
                                                  std::to_string(hs.free_dims) + ", " + std::to_string(hs.positive_dims) +
                                                  ")");
  }
  if (lambdas.empty()) throw Error(ErrorCode::EmptyGrid, "lambda grid is empty");
  for (double l : lambdas) require_lambda(l);
  const AxisBox sup = u.support();
  for (int j = hs.free_dims; j < dom.dim(); ++j) {
    if (!(sup.lo(j) > 0))
      throw Error(ErrorCode::SupportEscapesDomain, "field support must stay away from y = 0 on axis " + std::to_string(j));
  }
  for (double l : lambdas) {
    const AxisBox scaled{Point(sup.lo / l), Point(sup.hi / l)};
    try {
      require_inside(scaled, hs);
    } catch (const Error& e) {
      throw Error(ErrorCode::SupportEscapesDomain, "at lambda = " + fmt(l) + ": " + e.what());
    }
  }

  const int n = dom.dim();
  DilationReport rep;
  rep.lambdas = lambdas;
  rep.predicted_L_slope = (ecfg.a - n) / ecfg.q;
  rep.predicted_R_slope = (ecfg.p - n + ecfg.h) / ecfg.p;
  rep.relation_residual = exponent_relation(ecfg).residual;
  rep.factorized = resolve(path, u, hs, false, ecfg.q) == ProductPath::Factorized &&
                   resolve(path, u, hs, true, ecfg.p) == ProductPath::Factorized;

  // the base point l = 1 rides along as the last task
  const std::size_t m = lambdas.size();
  struct Pair {
    NormValue L, R;
  };
  const auto vals = parallel_map<Pair>(m + 1, [&](std::size_t i) {
    const ProductField v = i < m ? dilate(u, lambdas[i]) : u;
    return Pair{functional_L(v, dom, ecfg.a, ecfg.q, cfg, path), functional_R(v, dom, ecfg.h, ecfg.p, cfg, path)};
  });
  for (std::size_t i = 0; i < m; ++i) {
    rep.L_values.push_back(vals[i].L);
    rep.R_values.push_back(vals[i].R);
    if (vals[i].R.value > 0) rep.empirical_G = std::max(rep.empirical_G, vals[i].L.value / vals[i].R.value);
  }
  const NormValue& L1 = vals[m].L;
  const NormValue& R1 = vals[m].R;
  if (!(L1.value > 0) || !(R1.value > 0))
    throw Error(ErrorCode::InvalidConfig, "scaling laws need L[u] > 0 and R[u] > 0 for the base field");

  rep.insufficient_data = m < 2;
  rep.trivial_grid = std::all_of(lambdas.begin(), lambdas.end(), [&](double l) { return l == lambdas.front(); });
  if (!rep.insufficient_data && !rep.trivial_grid) {
    std::vector<double> Lv, Rv;
    for (std::size_t i = 0; i < m; ++i) {
      Lv.push_back(rep.L_values[i].value);
      Rv.push_back(rep.R_values[i].value);
    }
    rep.fitted_L_slope = fit_log_log<double>(lambdas, Lv).slope;
    rep.fitted_R_slope = fit_log_log<double>(lambdas, Rv).slope;
    rep.slopes_match = std::abs(rep.fitted_L_slope - rep.predicted_L_slope) <= kSlopeTolerance &&
                       std::abs(rep.fitted_R_slope - rep.predicted_R_slope) <= kSlopeTolerance;
  }

  auto rel = [](const NormValue& v) { return v.value > 0 ? v.error_estimate / v.value : 0.0; };
  rep.pointwise_pass = true;
  for (std::size_t i = 0; i < m; ++i) {
    const double ll = std::log(lambdas[i]);
    const double dL = std::abs(std::log(rep.L_values[i].value / L1.value) - rep.predicted_L_slope * ll);
    const double dR = std::abs(std::log(rep.R_values[i].value / R1.value) - rep.predicted_R_slope * ll);
    rep.max_pointwise_L_deviation = std::max(rep.max_pointwise_L_deviation, dL);
    rep.max_pointwise_R_deviation = std::max(rep.max_pointwise_R_deviation, dR);
    const double tolL = 10.0 * (rel(rep.L_values[i]) + rel(L1)) + 10.0 * cfg.rel_tol;
    const double tolR = 10.0 * (rel(rep.R_values[i]) + rel(R1)) + 10.0 * cfg.rel_tol;
    rep.pointwise_pass = rep.pointwise_pass && dL <= tolL && dR <= tolR;
  }
  return rep;
}

NecessityReport necessity_probe(const ProductField& u, const Domain& dom, const ExponentConfig& ecfg,
                                const std::vector<double>& lambdas, const QuadratureConfig& cfg, ProductPath path) {
  NecessityReport rep;
  rep.scaling = verify_scaling_laws(u, dom, ecfg, lambdas, cfg, path);
  rep.lambdas = lambdas;
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    rep.ratios.push_back(rep.scaling.L_values[i].value / rep.scaling.R_values[i].value);
  rep.residual = rep.scaling.relation_residual;
  rep.empirical_G = rep.scaling.empirical_G;
  rep.insufficient_data = rep.scaling.insufficient_data || rep.scaling.trivial_grid;
  if (!rep.insufficient_data) rep.ratio_slope = fit_log_log<double>(lambdas, rep.ratios).slope;
  rep.slope_error = std::abs(rep.ratio_slope - rep.residual);
  rep.consistent = !rep.insufficient_data && std::abs(rep.ratio_slope) <= kSlopeTolerance;
  return rep;
}

}  // namespace hspw
