#include "hspw/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hspw/detail/slabs.hpp"
#include "hspw/error.hpp"
#include "hspw/numerics.hpp"
#include "hspw/parallel.hpp"

namespace hspw {

void QuadratureConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (base_order < 2 || base_order > 64) bad("base_order must lie in [2, 64]");
  if (!(grading_ratio > 0 && grading_ratio < 1)) bad("grading_ratio must lie in (0, 1)");
  if (max_depth < 0) bad("max_depth must be >= 1 (or 0 for the dimension default)");
  if (!(rel_tol > 0) || !(abs_tol > 0)) bad("tolerances must be positive");
  if (!(divergence_growth_threshold > 1)) bad("divergence_growth_threshold must exceed 1");
  if (divergence_window < 2) bad("divergence_window must be >= 2");
  if (max_bisections < 1) bad("max_bisections must be >= 1");
}

int QuadratureConfig::depth_for(int dim) const {
  if (max_depth > 0) return max_depth;
  switch (dim) {
    case 1: return 24;
    case 2: return 12;
    default: return 8;
  }
}

const IntegralResult& require_settled(const IntegralResult& r) {
  if (!r.converged && !r.divergent_flag) {
    std::ostringstream os;
    os << "integral " << r.value << " has error estimate " << r.error_estimate << " after " << r.cells_used << " cells";
    throw Error(ErrorCode::NoConvergence, os.str());
  }
  return r;
}

namespace {

using detail::Patch;
using detail::Slab;

constexpr double kTiny = std::numeric_limits<double>::min();
// Tensor-rule evaluations allowed per adaptive patch (across a slice) and per
// cell along s.
constexpr std::int64_t kInnerBudget = 400;
constexpr std::int64_t kOuterBudget = 600;

struct Estimate {
  double value = 0.0;
  double error = 0.0;  // accumulated error of the pieces below this estimate
  double abs = 0.0;    // integral of |integrand|, the scale for relative tests
  std::int64_t cells = 0;
};

struct Accumulator {
  CompensatedSum<double> value, error, abs;
  std::int64_t cells = 0;

  void add(const Estimate& e) {
    value += e.value;
    error += e.error;
    abs += e.abs;
    cells += e.cells;
  }
  Estimate result() const { return {value.value(), error.value(), abs.value(), cells}; }
};

std::vector<AxisBox> split(const AxisBox& box) {
  const int k = box.dim();
  std::vector<AxisBox> out;
  out.reserve(std::size_t{1} << k);
  const Point mid = 0.5 * (box.lo + box.hi);
  for (int mask = 0; mask < (1 << k); ++mask) {
    AxisBox child = box;
    for (int a = 0; a < k; ++a) {
      if (mask & (1 << a))
        child.lo(a) = mid(a);
      else
        child.hi(a) = mid(a);
    }
    out.push_back(std::move(child));
  }
  return out;
}

/// Tensor Gauss rule on a box of dimension 0, 1 or 2. `node` returns an
/// Estimate for a single point (value, propagated error, |value|).
template <class NodeFn>
Estimate tensor_rule(NodeFn& node, const AxisBox& box, const GaussLegendreRule<double>& rule) {
  const int k = box.dim();
  Accumulator acc;
  if (k == 0) {
    Estimate e = node(box.lo);
    e.cells = 1;
    return e;
  }
  const Eigen::Index q = rule.nodes.size();
  const Point half = 0.5 * (box.hi - box.lo);
  const Point mid = 0.5 * (box.hi + box.lo);
  const double scale = half.prod();
  Point t(k);
  if (k == 1) {
    for (Eigen::Index i = 0; i < q; ++i) {
      t(0) = mid(0) + half(0) * rule.nodes(i);
      const Estimate e = node(t);
      const double w = rule.weights(i) * scale;
      acc.add({w * e.value, w * e.error, w * e.abs, 0});
    }
  } else {
    for (Eigen::Index i = 0; i < q; ++i) {
      t(0) = mid(0) + half(0) * rule.nodes(i);
      for (Eigen::Index j = 0; j < q; ++j) {
        t(1) = mid(1) + half(1) * rule.nodes(j);
        const Estimate e = node(t);
        const double w = rule.weights(i) * rule.weights(j) * scale;
        acc.add({w * e.value, w * e.error, w * e.abs, 0});
      }
    }
  }
  Estimate out = acc.result();
  out.cells = 1;
  return out;
}

/// Globally adaptive bisection: the cell whose parent rule and children
/// disagree most is split next, until the summed disagreement meets the
/// tolerance, every cell is at the depth cap, or the cell budget runs out.
template <class NodeFn>
Estimate adaptive_box(NodeFn& node, const AxisBox& box, const GaussLegendreRule<double>& rule, double rel,
                      int depth_cap, std::int64_t budget) {
  const Estimate whole = tensor_rule(node, box, rule);
  if (box.dim() == 0) return whole;

  struct Cell {
    AxisBox box;
    std::vector<Estimate> parts;  // children estimates
    Estimate fine;
    double diff;
    int depth;
    std::int64_t id;
  };
  std::int64_t next_id = 0;
  std::int64_t evaluations = 1;
  auto make_cell = [&](const AxisBox& b, const Estimate& parent, int depth) {
    Cell c{b, {}, {}, 0.0, depth, next_id++};
    Accumulator sum;
    for (const auto& child : split(b)) {
      c.parts.push_back(tensor_rule(node, child, rule));
      sum.add(c.parts.back());
      ++evaluations;
    }
    c.fine = sum.result();
    c.diff = std::abs(parent.value - c.fine.value);
    return c;
  };
  auto worse = [](const Cell& a, const Cell& b) { return a.diff < b.diff || (a.diff == b.diff && a.id > b.id); };

  std::vector<Cell> heap, done;
  heap.push_back(make_cell(box, whole, 0));
  auto totals = [&] {
    Accumulator acc;
    CompensatedSum<double> diff;
    for (const auto* set : {&heap, &done})
      for (const auto& c : *set) {
        acc.add(c.fine);
        diff += c.diff;
      }
    Estimate e = acc.result();
    e.error += diff.value();
    return e;
  };
  CompensatedSum<double> diff_sum;
  diff_sum += heap.front().diff;
  double abs_sum = heap.front().fine.abs;
  while (!heap.empty() && evaluations < budget) {
    if (diff_sum.value() <= std::max(kTiny, rel * abs_sum)) break;
    std::pop_heap(heap.begin(), heap.end(), worse);
    Cell worst = std::move(heap.back());
    heap.pop_back();
    if (worst.depth + 1 >= depth_cap) {
      done.push_back(std::move(worst));
      continue;
    }
    diff_sum += -worst.diff;
    abs_sum -= worst.fine.abs;
    const auto children = split(worst.box);
    for (std::size_t i = 0; i < children.size(); ++i) {
      Cell c = make_cell(children[i], worst.parts[i], worst.depth + 1);
      diff_sum += c.diff;
      abs_sum += c.fine.abs;
      heap.push_back(std::move(c));
      std::push_heap(heap.begin(), heap.end(), worse);
    }
  }
  Estimate out = totals();
  out.cells = evaluations;
  return out;
}

/// Integral of weight * chi for chi in {0, 1}. Cells where every node agrees
/// are resolved exactly by the weight rule; straddling cells are bisected and,
/// at the depth cap, counted as half with the other half as error.
template <class ChiFn, class WeightFn>
Estimate indicator_box(ChiFn& chi, WeightFn& weight, const AxisBox& box, const GaussLegendreRule<double>& rule,
                       int depth, int depth_cap) {
  const int k = box.dim();
  if (k == 0) {
    const double w = weight(box.lo);
    const double v = chi(box.lo) ? w : 0.0;
    return {v, 0.0, std::abs(w), 1};
  }
  const Eigen::Index q = rule.nodes.size();
  const Point half = 0.5 * (box.hi - box.lo);
  const Point mid = 0.5 * (box.hi + box.lo);
  const double scale = half.prod();
  CompensatedSum<double> full;
  int inside = 0, total = 0;
  Point t(k);
  auto visit = [&](double w) {
    full += w * weight(t) * scale;
    inside += chi(t) ? 1 : 0;
    ++total;
  };
  for (Eigen::Index i = 0; i < q; ++i) {
    t(0) = mid(0) + half(0) * rule.nodes(i);
    if (k == 1) {
      visit(rule.weights(i));
    } else {
      for (Eigen::Index j = 0; j < q; ++j) {
        t(1) = mid(1) + half(1) * rule.nodes(j);
        visit(rule.weights(i) * rule.weights(j));
      }
    }
  }
  const double f = full.value();
  if (inside == 0) return {0.0, 0.0, std::abs(f), 1};
  if (inside == total) return {f, 0.0, std::abs(f), 1};
  if (depth >= depth_cap) return {0.5 * f, 0.5 * std::abs(f), std::abs(f), 1};
  Accumulator acc;
  for (const auto& c : split(box)) acc.add(indicator_box(chi, weight, c, rule, depth + 1, depth_cap));
  return acc.result();
}

struct PieceResult {
  Estimate est;
  bool converged = true;
  bool divergent = false;
};

class SlabIntegrator {
 public:
  SlabIntegrator(const Integrand& f, double exponent, const QuadratureConfig& cfg, int dim)
      : f_(f),
        exponent_(exponent),
        cfg_(cfg),
        rule_(gauss_legendre(cfg.base_order)),
        dim_(dim),
        depth_(cfg.depth_for(dim)),
        inner_rel_(0.1 * cfg.rel_tol),
        outer_rel_(0.5 * cfg.rel_tol),
        tail_a_(exponent < 1.0 ? exponent : exponent - std::floor(exponent)),
        tail_rule_(compute_gauss_jacobi_left<double>(cfg.base_order, tail_a_)) {}

  PieceResult integrate(const Slab& slab) const {
    std::vector<double> pts{slab.s_begin};
    pts.insert(pts.end(), slab.breakpoints.begin(), slab.breakpoints.end());
    for (double b : f_.distance_breakpoints)
      if (b > slab.s_begin && b < slab.s_end) pts.push_back(b);
    pts.push_back(slab.s_end);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    PieceResult out;
    Accumulator regular;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (i == 1 && slab.s_begin == 0.0) continue;  // singular piece, handled below
      regular.add(regular_piece(slab, pts[i - 1], pts[i]));
    }
    Estimate total = regular.result();
    if (slab.s_begin == 0.0) {
      const PieceResult sing = singular_piece(slab, pts[1], total.abs);
      Accumulator acc;
      acc.add(total);
      acc.add(sing.est);
      total = acc.result();
      out.converged = sing.converged;
      out.divergent = sing.divergent;
    }
    out.est = total;
    return out;
  }

 private:
  double weight(double s) const { return exponent_ == 0.0 ? 1.0 : std::pow(s, -exponent_); }

  double checked(const Point& x, double s) const {
    const double v = f_.eval(x);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "integrand is not finite at (" << x.transpose() << "), distance " << s;
      throw Error(ErrorCode::UnboundedIntegrand, os.str());
    }
    return v;
  }

  // Weighted slice integral at distance s (smooth integrands).
  Estimate slice_estimate(const Slab& slab, double s) const {
    std::vector<Patch> patches;
    slab.slice(s, patches);
    const double w = weight(s);
    Accumulator acc;
    for (const auto& patch : patches) {
      auto node = [&](const Point& t) -> Estimate {
        const double v = checked(patch.map(t), s);
        if (v == 0.0) return {};
        const double j = patch.jacobian(t);
        const double wv = v * w * j;
        if (!std::isfinite(wv)) throw Error(ErrorCode::UnboundedIntegrand, "weighted integrand overflows");
        return {wv, 0.0, std::abs(wv), 0};
      };
      const int cap = patch.params.dim() <= 1 ? cfg_.max_bisections : std::min(cfg_.max_bisections, 8);
      acc.add(adaptive_box(node, patch.params, rule_, inner_rel_, cap, kInnerBudget));
    }
    return acc.result();
  }

  // Weighted measure of {f > 0.5} within the slice (indicator integrands).
  Estimate slice_measure(const Slab& slab, double s) const {
    std::vector<Patch> patches;
    slab.slice(s, patches);
    const double w = weight(s);
    Accumulator acc;
    for (const auto& patch : patches) {
      auto chi = [&](const Point& t) { return checked(patch.map(t), s) > 0.5; };
      auto wt = [&](const Point& t) { return w * patch.jacobian(t); };
      const int cap = patch.params.dim() <= 1 ? cfg_.max_bisections : std::min(cfg_.max_bisections, 8);
      acc.add(indicator_box(chi, wt, patch.params, rule_, 0, cap));
    }
    return acc.result();
  }

  // One-dimensional slabs in indicator mode are resolved along s directly.
  bool pointwise_indicator() const { return f_.indicator && dim_ == 1; }

  Estimate outer_cell(const Slab& slab, double a, double b) const {
    const AxisBox cell{make_point({a}), make_point({b})};
    if (pointwise_indicator()) {
      std::vector<Patch> patches;
      auto chi = [&](const Point& t) {
        patches.clear();
        slab.slice(t(0), patches);
        return !patches.empty() && checked(patches.front().map(Point(0)), t(0)) > 0.5;
      };
      auto wt = [&](const Point& t) { return weight(t(0)); };
      return indicator_box(chi, wt, cell, rule_, 0, cfg_.max_bisections);
    }
    auto node = [&](const Point& t) -> Estimate {
      return f_.indicator ? slice_measure(slab, t(0)) : slice_estimate(slab, t(0));
    };
    return adaptive_box(node, cell, rule_, outer_rel_, cfg_.max_bisections, kOuterBudget);
  }

  // Estimate of the piece [0, h] from the rule exact for s^{-a} times a
  // polynomial; the remaining power of s stays in the slice values.
  Estimate tail(const Slab& slab, double h) const {
    Accumulator acc;
    const double scale = std::pow(h, 1.0 - tail_a_);
    for (Eigen::Index i = 0; i < tail_rule_.nodes.size(); ++i) {
      const double s = h * tail_rule_.nodes(i);
      Estimate e;
      if (pointwise_indicator()) {
        std::vector<Patch> patches;
        slab.slice(s, patches);
        const double w = weight(s);
        const bool in = !patches.empty() && checked(patches.front().map(Point(0)), s) > 0.5;
        e = {in ? w : 0.0, 0.0, std::abs(w), 0};
      } else {
        e = f_.indicator ? slice_measure(slab, s) : slice_estimate(slab, s);
      }
      const double c = tail_rule_.weights(i) * scale * std::pow(s, tail_a_);
      acc.add({c * e.value, c * e.error, c * e.abs, 0});
    }
    return acc.result();
  }

  Estimate regular_piece(const Slab& slab, double a, double b) const {
    if (!(b > a)) return {};
    return outer_cell(slab, a, b);
  }

  // Geometric cells toward s = 0 with epsilon extrapolation of the partial sums.
  PieceResult singular_piece(const Slab& slab, double top, double regular_abs) const {
    const double r = cfg_.grading_ratio;
    std::vector<double> partial, increments, sums;
    Accumulator cells;
    CompensatedSum<double> running;
    PieceResult out;
    out.converged = false;
    double hi = top;
    partial.push_back(tail(slab, top).value);
    for (int k = 0; k < depth_; ++k) {
      const double lo = hi * r;
      const Estimate e = outer_cell(slab, lo, hi);
      hi = lo;
      cells.add(e);
      running += e.value;
      increments.push_back(e.value);
      sums.push_back(running.value());
      const Estimate rest = tail(slab, lo);
      partial.push_back(running.value() + rest.value);
      Estimate sofar = cells.result();
      sofar.error += rest.error;
      const double target = 0.5 * std::max(cfg_.abs_tol, cfg_.rel_tol * (regular_abs + sofar.abs));

      if (k >= 1 && increments[k] == 0.0 && increments[k - 1] == 0.0 && rest.value == 0.0) {
        out.est = {running.value(), sofar.error, sofar.abs, sofar.cells};
        out.converged = sofar.error <= target;
        return out;
      }

      const int w = cfg_.divergence_window;
      if (k >= w) {
        bool non_contracting = true;
        for (int j = k - w + 1; j <= k; ++j) {
          const double prev = std::abs(increments[j - 1]), cur = std::abs(increments[j]);
          if (cur == 0.0 || cur < (1.0 - 1e-3) * prev) non_contracting = false;
        }
        // a power-law blow-up has a settled increment ratio; peaked but
        // integrable slices only grow while the cells approach the peak
        if (non_contracting) {
          const double last = std::abs(increments[k]) / std::abs(increments[k - 1]);
          for (int j = k - w + 2; j < k; ++j) {
            const double r = std::abs(increments[j]) / std::abs(increments[j - 1]);
            if (std::abs(r / last - 1.0) > 0.05) non_contracting = false;
          }
        }
        // ratios falling towards a limit below one (a Jacobian factor such as
        // 1 - s fading out) belong to a convergent integral
        if (non_contracting && k >= 3) {
          const double r0 = std::abs(increments[k - 2]) / std::abs(increments[k - 3]);
          const double r1 = std::abs(increments[k - 1]) / std::abs(increments[k - 2]);
          const double r2 = std::abs(increments[k]) / std::abs(increments[k - 1]);
          if (r2 < r1 && r1 < r0) {
            const double d1 = r1 - r0, d2 = r2 - r1;
            const double limit = d2 - d1 != 0.0 ? r2 - d2 * d2 / (d2 - d1) : r2;
            if (limit < 1.0 - 1e-3) non_contracting = false;
          }
        }
        const bool growing = std::abs(sums[k]) > cfg_.divergence_growth_threshold * std::abs(sums[k - w]);
        if (non_contracting && growing) {
          out.est = {sums.back(), std::numeric_limits<double>::infinity(), sofar.abs, sofar.cells};
          out.divergent = true;
          return out;
        }
      }

      const auto ext = wynn_extrapolate<double>(partial);
      out.est = {ext.value, ext.error + sofar.error, sofar.abs, sofar.cells};
      const bool contracting = std::abs(increments[k]) < (1.0 - 1e-3) * std::abs(increments[k - 1 < 0 ? 0 : k - 1]) ||
                               std::abs(increments[k]) <= target;
      if (k >= 2 && contracting && out.est.error <= target) {
        out.converged = true;
        return out;
      }
    }
    return out;
  }

  const Integrand& f_;
  double exponent_;
  const QuadratureConfig& cfg_;
  const GaussLegendreRule<double>& rule_;
  int dim_;
  int depth_;
  double inner_rel_;
  double outer_rel_;
  double tail_a_;
  GaussLegendreRule<double> tail_rule_;
};

IntegralResult integrate_slabs(const Integrand& f, const Domain& dom, double exponent, const QuadratureConfig& cfg) {
  cfg.validate();
  if (!f.eval) throw Error(ErrorCode::InvalidConfig, "integrand has no evaluation function");
  if (!std::isfinite(exponent)) throw Error(ErrorCode::InvalidAlpha, "weight exponent must be finite");

  const auto slabs = detail::decompose(dom, f.support);
  const SlabIntegrator integrator(f, exponent, cfg, dom.dim());
  const auto pieces = parallel_map<PieceResult>(slabs.size(), [&](std::size_t i) { return integrator.integrate(slabs[i]); });

  IntegralResult res;
  Accumulator acc;
  for (const auto& p : pieces) {
    acc.add(p.est);
    res.divergent_flag = res.divergent_flag || p.divergent;
  }
  const Estimate total = acc.result();
  res.value = total.value;
  res.error_estimate = total.error;
  res.cells_used = total.cells;
  res.converged = !res.divergent_flag && res.error_estimate <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(res.value));
  return res;
}

}  // namespace

IntegralResult integrate_distance_power(const Integrand& f, const Domain& dom, double exponent,
                                        const QuadratureConfig& cfg) {
  return integrate_slabs(f, dom, exponent, cfg);
}

IntegralResult integrate_segment(const std::function<double(double)>& f, double lo, double hi,
                                 const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw Error(ErrorCode::InvalidConfig, "segment needs finite lo <= hi");
  IntegralResult res;
  if (lo == hi) {
    res.converged = true;
    return res;
  }
  auto node = [&f](const Point& t) -> Estimate {
    const double v = f(t(0));
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "integrand is not finite at " << t(0);
      throw Error(ErrorCode::UnboundedIntegrand, os.str());
    }
    return {v, 0.0, std::abs(v), 0};
  };
  const AxisBox box{make_point({lo}), make_point({hi})};
  const Estimate e = adaptive_box(node, box, gauss_legendre(cfg.base_order), 0.1 * cfg.rel_tol, cfg.max_bisections,
                                  kOuterBudget);
  res.value = e.value;
  res.error_estimate = e.error;
  res.cells_used = e.cells;
  res.converged = e.error <= std::max(cfg.abs_tol, cfg.rel_tol * e.abs);
  return res;
}

IntegralResult integrate_weighted(const Integrand& f, const Domain& dom, double alpha, const QuadratureConfig& cfg) {
  if (!(alpha < dom.dim())) {
    std::ostringstream os;
    os << "alpha = " << alpha << " must be below the dimension " << dom.dim();
    throw Error(ErrorCode::InvalidAlpha, os.str());
  }
  return integrate_slabs(f, dom, alpha, cfg);
}

IntegralResult measure_of_superlevel(const Domain& dom, double alpha, const Integrand& f, double level,
                                     const QuadratureConfig& cfg) {
  if (!(level >= 0)) throw Error(ErrorCode::InvalidConfig, "superlevel threshold must be >= 0");
  Integrand chi;
  chi.indicator = true;
  chi.support = f.support;
  chi.distance_breakpoints = f.distance_breakpoints;
  chi.eval = [&f, level](const Point& x) {
    const double v = f.eval(x);
    if (std::isnan(v)) return v;
    return std::abs(v) > level ? 1.0 : 0.0;
  };
  return integrate_weighted(chi, dom, alpha, cfg);
}

}  // namespace hspw
