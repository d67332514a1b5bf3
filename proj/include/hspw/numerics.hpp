#pragma once

// Scalar-generic numerical kernels shared by the quadrature, the p-sweeps and
// the dilation fits. Everything here is header-only and free of global state
// except the cached Gauss-Legendre tables.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace hspw {

/// Neumaier's variant of Kahan summation. Order-dependent by nature: callers
/// that need reproducibility must add terms in a fixed order.
template <typename Scalar>
class CompensatedSum {
 public:
  CompensatedSum& operator+=(Scalar x) {
    const Scalar t = sum_ + x;
    if (!std::isfinite(t)) {  // no correction survives inf - inf
      sum_ = t;
      comp_ = 0;
      return *this;
    }
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
    return *this;
  }

  Scalar value() const { return sum_ + comp_; }

 private:
  Scalar sum_{0};
  Scalar comp_{0};
};

template <typename Scalar>
struct GaussLegendreRule {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes;    // on [-1, 1], ascending
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;  // sum to 2
};

/// Newton iteration on the three-term Legendre recurrence.
template <typename Scalar>
GaussLegendreRule<Scalar> compute_gauss_legendre(int order) {
  GaussLegendreRule<Scalar> rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    Scalar x = std::cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(order) + Scalar(0.5)));
    Scalar dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      Scalar p0 = 1, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const Scalar pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (order == 1) p0 = 1;
      dp = order * (x * p1 - p0) / (x * x - 1);
      const Scalar dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) <= 4 * std::numeric_limits<Scalar>::epsilon()) break;
    }
    // Recompute the derivative at the converged node for the weight.
    Scalar p0 = 1, p1 = x;
    for (int k = 2; k <= order; ++k) {
      const Scalar pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = order == 1 ? Scalar(1) : order * (x * p1 - p0) / (x * x - 1);
    const Scalar w = 2 / ((1 - x * x) * dp * dp);
    rule.nodes(i) = -x;
    rule.nodes(order - 1 - i) = x;
    rule.weights(i) = w;
    rule.weights(order - 1 - i) = w;
  }
  if (order % 2 == 1) rule.nodes(order / 2) = 0;
  return rule;
}

/// Cached double-precision rule; thread-safe, references stay valid.
const GaussLegendreRule<double>& gauss_legendre(int order);

/// Gauss rule on [0, 1] for the weight u^{-a}, a < 1, from the Jacobi matrix
/// of the polynomials orthogonal to (1 + x)^{-a} on [-1, 1].
template <typename Scalar>
GaussLegendreRule<Scalar> compute_gauss_jacobi_left(int order, Scalar a) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Scalar b = -a;
  Mat jac = Mat::Zero(order, order);
  jac(0, 0) = b / (b + 2);
  for (int k = 1; k < order; ++k) {
    const Scalar s = 2 * k + b;
    jac(k, k) = b * b / (s * (s + 2));
    const Scalar off = std::sqrt(4 * Scalar(k) * k * (k + b) * (k + b) / (s * s * (s + 1) * (s - 1)));
    jac(k, k - 1) = off;
    jac(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(jac);
  GaussLegendreRule<Scalar> rule;
  rule.nodes = (es.eigenvalues().array() + 1) / 2;
  rule.weights = es.eigenvectors().row(0).transpose().array().square() / (1 - a);
  return rule;
}

template <typename Scalar>
struct Extrapolation {
  Scalar value{0};
  Scalar error{std::numeric_limits<Scalar>::infinity()};
};

/// Wynn's epsilon algorithm on a sequence of partial sums. Returns the even
/// column entry whose distance to its predecessors in the same column is
/// smallest; that distance is the error estimate.
template <typename Scalar>
Extrapolation<Scalar> wynn_extrapolate(std::span<const Scalar> partial) {
  const std::size_t m = partial.size();
  Extrapolation<Scalar> best;
  if (m == 0) return best;
  best.value = partial[m - 1];
  if (m >= 2) best.error = std::abs(partial[m - 1] - partial[m - 2]);
  if (m < 3) return best;

  // cols[j][k] = e_j^{(k)}; column j has m - j entries.
  std::vector<std::vector<Scalar>> cols;
  cols.emplace_back(partial.begin(), partial.end());
  std::vector<Scalar> prev(m + 1, Scalar(0));  // e_{-1}
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const auto& cur = cols[j];
    std::vector<Scalar> next(cur.size() - 1);
    bool ok = true;
    for (std::size_t k = 0; k + 1 < cur.size(); ++k) {
      const Scalar diff = cur[k + 1] - cur[k];
      if (diff == Scalar(0) || !std::isfinite(diff)) {
        ok = false;
        break;
      }
      next[k] = prev[k + 1] + Scalar(1) / diff;
    }
    if (!ok) break;
    prev = cur;
    cols.push_back(std::move(next));
  }

  const Scalar floor = 16 * std::numeric_limits<Scalar>::epsilon();
  for (std::size_t j = 0; j < cols.size(); j += 2) {
    const auto& c = cols[j];
    if (c.size() < 3) break;
    const Scalar e0 = c[c.size() - 1];
    const Scalar e1 = c[c.size() - 2];
    const Scalar e2 = c[c.size() - 3];
    if (!std::isfinite(e0) || !std::isfinite(e1) || !std::isfinite(e2)) continue;
    const Scalar err = std::max(std::abs(e0 - e1), std::abs(e0 - e2)) + floor * std::abs(e0);
    if (err < best.error) {
      best.value = e0;
      best.error = err;
    }
  }
  return best;
}

template <typename Scalar>
struct GoldenResult {
  Scalar x;
  Scalar fx;
  int evaluations;
};

/// Maximizes a unimodal function on [a, b].
template <typename Scalar, typename F>
GoldenResult<Scalar> golden_section_maximize(F&& f, Scalar a, Scalar b, Scalar x_tol, int max_iter) {
  const Scalar inv_phi = (std::sqrt(Scalar(5)) - 1) / 2;
  Scalar c = b - inv_phi * (b - a);
  Scalar d = a + inv_phi * (b - a);
  Scalar fc = f(c), fd = f(d);
  int evals = 2;
  for (int it = 0; it < max_iter && (b - a) > x_tol; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++evals;
  }
  return fc >= fd ? GoldenResult<Scalar>{c, fc, evals} : GoldenResult<Scalar>{d, fd, evals};
}

template <typename Scalar>
struct LineFit {
  Scalar slope{0};
  Scalar intercept{0};
  Scalar max_residual{0};
  bool degenerate{true};
};

/// Least-squares line through (x_i, y_i).
template <typename Scalar>
LineFit<Scalar> fit_line(std::span<const Scalar> x, std::span<const Scalar> y) {
  LineFit<Scalar> fit;
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n < 2) return fit;
  const Scalar spread = *std::max_element(x.begin(), x.end()) - *std::min_element(x.begin(), x.end());
  if (!(spread > 0)) return fit;

  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> design(n, 2);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = x[static_cast<std::size_t>(i)];
    design(i, 1) = 1;
    rhs(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Matrix<Scalar, 2, 1> coef = design.colPivHouseholderQr().solve(rhs);
  fit.slope = coef(0);
  fit.intercept = coef(1);
  fit.max_residual = (design * coef - rhs).cwiseAbs().maxCoeff();
  fit.degenerate = false;
  return fit;
}

/// Slope of log(value) against log(scale).
template <typename Scalar>
LineFit<Scalar> fit_log_log(std::span<const Scalar> scale, std::span<const Scalar> value) {
  std::vector<Scalar> lx(scale.size()), ly(value.size());
  std::transform(scale.begin(), scale.end(), lx.begin(), [](Scalar v) { return std::log(v); });
  std::transform(value.begin(), value.end(), ly.begin(), [](Scalar v) { return std::log(v); });
  return fit_line<Scalar>(lx, ly);
}

}  // namespace hspw
