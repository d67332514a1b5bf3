#include "hspw/detail/slabs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "hspw/error.hpp"

namespace hspw::detail {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr int kMaxGenericDim = 3;

double unit_jacobian(const Point&) { return 1.0; }

Point insert_coordinate(const Point& tau, int axis, double value) {
  const auto n = tau.size() + 1;
  Point x(n);
  for (Eigen::Index j = 0, t = 0; j < n; ++j) x(j) = (j == axis) ? value : tau(t++);
  return x;
}

void clamp_range(Slab& slab, double lo, double hi) {
  slab.s_begin = std::max(slab.s_begin, lo);
  slab.s_end = std::min(slab.s_end, hi);
}

void finish(Slab& slab) {
  auto& b = slab.breakpoints;
  b.erase(std::remove_if(b.begin(), b.end(), [&](double v) { return !(v > slab.s_begin && v < slab.s_end); }), b.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
}

// Slabs of an axis-aligned box: for face (axis, side) the slice at distance s
// is the box shrunk by s on every other axis.
std::vector<Slab> box_slabs(const AxisBox& extent, const std::optional<AxisBox>& support) {
  const int n = extent.dim();
  const double s_cap = 0.5 * (extent.hi - extent.lo).minCoeff();
  std::vector<Slab> slabs;
  for (int axis = 0; axis < n; ++axis) {
    for (int side = 0; side < 2; ++side) {
      Slab slab;
      slab.s_begin = 0.0;
      slab.s_end = s_cap;
      const double face = side == 0 ? extent.lo(axis) : extent.hi(axis);
      const double dir = side == 0 ? 1.0 : -1.0;
      if (support) {
        const double a = dir * (support->lo(axis) - face);
        const double b = dir * (support->hi(axis) - face);
        clamp_range(slab, std::min(a, b), std::max(a, b));
        for (int j = 0; j < n; ++j) {
          if (j == axis) continue;
          slab.breakpoints.push_back(support->lo(j) - extent.lo(j));
          slab.breakpoints.push_back(extent.hi(j) - support->hi(j));
        }
      }
      if (!(slab.s_end > slab.s_begin)) continue;
      finish(slab);
      slab.slice = [extent, support, axis, face, dir, n](double s, std::vector<Patch>& out) {
        AxisBox params{Point(n - 1), Point(n - 1)};
        for (int j = 0, t = 0; j < n; ++j) {
          if (j == axis) continue;
          double lo = extent.lo(j) + s, hi = extent.hi(j) - s;
          if (support) {
            lo = std::max(lo, support->lo(j));
            hi = std::min(hi, support->hi(j));
          }
          if (!(hi > lo)) return;
          params.lo(t) = lo;
          params.hi(t) = hi;
          ++t;
        }
        const double xi = face + dir * s;
        out.push_back(Patch{params, [axis, xi](const Point& tau) { return insert_coordinate(tau, axis, xi); },
                            unit_jacobian});
      };
      slabs.push_back(std::move(slab));
    }
  }
  return slabs;
}

std::vector<Slab> halfspace_slabs(const HalfSpaceProduct& hs, const std::optional<AxisBox>& support) {
  const int n = hs.free_dims + hs.positive_dims;
  const auto& t = hs.truncation;
  if (!support)
    throw Error(ErrorCode::SupportEscapesDomain, "fields on a half-space product need a declared support box");
  if (support->dim() != n || !t.contains_closed(support->lo) || !t.contains_closed(support->hi))
    throw Error(ErrorCode::SupportEscapesDomain, "field support leaves the truncation box");
  const AxisBox sup = *support;

  std::vector<Slab> slabs;
  for (int j = 0; j < hs.positive_dims; ++j) {
    const int m = hs.free_dims + j;
    Slab slab;
    slab.s_begin = std::max(0.0, sup.lo(m));
    slab.s_end = sup.hi(m);
    for (int k = hs.free_dims; k < n; ++k) {
      if (k == m) continue;
      slab.breakpoints.push_back(sup.lo(k));
      slab.breakpoints.push_back(sup.hi(k));
    }
    if (!(slab.s_end > slab.s_begin)) continue;
    finish(slab);
    const int free_dims = hs.free_dims;
    slab.slice = [sup, m, n, free_dims](double s, std::vector<Patch>& out) {
      AxisBox params{Point(n - 1), Point(n - 1)};
      for (int k = 0, q = 0; k < n; ++k) {
        if (k == m) continue;
        double lo = sup.lo(k), hi = sup.hi(k);
        // the slab owns the points whose smallest positive coordinate is x_m
        if (k >= free_dims) lo = std::max(lo, s);
        if (!(hi > lo)) return;
        params.lo(q) = lo;
        params.hi(q) = hi;
        ++q;
      }
      out.push_back(Patch{params, [m, s](const Point& tau) { return insert_coordinate(tau, m, s); }, unit_jacobian});
    };
    slabs.push_back(std::move(slab));
  }
  return slabs;
}

std::vector<Slab> ball_slabs(const Ball& ball, const std::optional<AxisBox>& support) {
  const int n = static_cast<int>(ball.center.size());
  const double radius = ball.radius;
  if (n == 1)
    return box_slabs(AxisBox{Point(ball.center.array() - radius), Point(ball.center.array() + radius)}, support);
  Slab slab;
  slab.s_begin = 0.0;
  slab.s_end = radius;
  if (support) {
    // radial range of the support box around the center
    const Point nearest = ball.center.cwiseMax(support->lo).cwiseMin(support->hi);
    const double rho_min = (nearest - ball.center).norm();
    const Point far = (ball.center - support->lo).cwiseAbs().cwiseMax((support->hi - ball.center).cwiseAbs());
    const double rho_max = far.norm();
    clamp_range(slab, radius - std::min(rho_max, radius), radius - std::min(rho_min, radius));
  }
  if (!(slab.s_end > slab.s_begin)) return {};
  const Point c = ball.center;
  slab.slice = [c, radius, n](double s, std::vector<Patch>& out) {
    const double rho = radius - s;
    if (n == 2) {
      AxisBox angles{make_point({0.0}), make_point({2.0 * std::numbers::pi})};
      out.push_back(Patch{angles,
                          [c, rho](const Point& t) {
                            return Point(c + rho * make_point({std::cos(t(0)), std::sin(t(0))}));
                          },
                          [rho](const Point&) { return rho; }});
    } else {
      AxisBox angles{make_point({0.0, 0.0}), make_point({std::numbers::pi, 2.0 * std::numbers::pi})};
      out.push_back(Patch{angles,
                          [c, rho](const Point& t) {
                            const double sp = std::sin(t(0));
                            return Point(c + rho * make_point({sp * std::cos(t(1)), sp * std::sin(t(1)), std::cos(t(0))}));
                          },
                          [rho](const Point& t) { return rho * rho * std::sin(t(0)); }});
    }
  };
  return {std::move(slab)};
}

using Polygon = std::vector<Eigen::Vector2d>;

// Sutherland-Hodgman step for the half-plane g . tau <= h.
Polygon clip(const Polygon& poly, const Eigen::Vector2d& g, double h) {
  Polygon out;
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % m];
    const double fa = g.dot(a) - h, fb = g.dot(b) - h;
    if (fa <= 0) out.push_back(a);
    if ((fa < 0 && fb > 0) || (fa > 0 && fb < 0)) out.push_back(a + (b - a) * (fa / (fa - fb)));
  }
  return out;
}

std::vector<Slab> polytope_slabs(const ConvexPolytope& poly, int n, const AxisBox& bbox,
                                 const std::optional<AxisBox>& support) {
  const auto m = static_cast<int>(poly.faces.size());
  const double reach = std::max(bbox.lo.norm(), bbox.hi.norm()) + (bbox.hi - bbox.lo).norm() + 1.0;
  std::vector<Slab> slabs;
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd nu = poly.faces[static_cast<std::size_t>(i)].normal;
    const double ci = poly.faces[static_cast<std::size_t>(i)].offset;

    // Orthonormal basis of the face's tangent space.
    Eigen::MatrixXd tangent(n, n - 1);
    if (n > 1) {
      Eigen::MatrixXd frame(n, n);
      frame.col(0) = nu;
      frame.rightCols(n - 1) = Eigen::MatrixXd::Identity(n, n).leftCols(n - 1);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame);
      const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
      tangent = q.rightCols(n - 1);
    }

    // Region of face i in z = (s, tau): dist_j(x) >= s for j != i, s >= 0.
    Eigen::MatrixXd a(m, n);
    Eigen::VectorXd b(m);
    Eigen::VectorXd coef_s(m - 1), rhs(m - 1);
    Eigen::MatrixXd coef_tau(m - 1, n - 1);
    for (int j = 0, r = 0; j < m; ++j) {
      if (j == i) continue;
      const auto& fj = poly.faces[static_cast<std::size_t>(j)];
      const Eigen::VectorXd nj = fj.normal;
      const double cos_ij = nj.dot(nu);
      coef_s(r) = 1.0 - cos_ij;
      if (n > 1) coef_tau.row(r) = nj.transpose() * tangent;
      rhs(r) = fj.offset - ci * cos_ij;
      a(r, 0) = coef_s(r);
      if (n > 1) a.row(r).tail(n - 1) = coef_tau.row(r);
      b(r) = rhs(r);
      ++r;
    }
    a.row(m - 1).setZero();
    a(m - 1, 0) = -1.0;
    b(m - 1) = 0.0;

    const auto verts = enumerate_vertices(a, b);
    if (verts.empty()) continue;
    Slab slab;
    slab.s_begin = 0.0;
    slab.s_end = 0.0;
    for (const auto& v : verts) {
      slab.s_end = std::max(slab.s_end, v(0));
      slab.breakpoints.push_back(v(0));
    }
    if (support) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int corner = 0; corner < (1 << n); ++corner) {
        Eigen::VectorXd x(n);
        for (int k = 0; k < n; ++k) x(k) = (corner >> k) & 1 ? support->hi(k) : support->lo(k);
        const double s = ci - nu.dot(x);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
      clamp_range(slab, lo, hi);
    }
    if (!(slab.s_end > slab.s_begin)) continue;
    finish(slab);

    slab.slice = [=](double s, std::vector<Patch>& out) {
      auto to_x = [nu, ci, tangent, n](double sv, const Eigen::VectorXd& tau) {
        Eigen::VectorXd x = (ci - sv) * nu;
        if (n > 1) x += tangent * tau;
        return Point(x);
      };
      const Eigen::VectorXd bound = rhs - coef_s * s;
      if (n == 1) {
        if ((bound.array() < 0).any()) return;
        out.push_back(Patch{AxisBox{Point(0), Point(0)},
                            [to_x, s](const Point&) { return to_x(s, Eigen::VectorXd(0)); }, unit_jacobian});
      } else if (n == 2) {
        double lo = -reach, hi = reach;
        for (Eigen::Index r = 0; r < bound.size(); ++r) {
          const double g = coef_tau(r, 0);
          if (std::abs(g) < 1e-14) {
            if (bound(r) < 0) return;
          } else if (g > 0) {
            hi = std::min(hi, bound(r) / g);
          } else {
            lo = std::max(lo, bound(r) / g);
          }
        }
        if (!(hi > lo)) return;
        out.push_back(Patch{AxisBox{make_point({lo}), make_point({hi})},
                            [to_x, s](const Point& t) { return to_x(s, Eigen::VectorXd::Constant(1, t(0))); },
                            unit_jacobian});
      } else {
        Polygon pg{{-reach, -reach}, {reach, -reach}, {reach, reach}, {-reach, reach}};
        for (Eigen::Index r = 0; r < bound.size() && pg.size() >= 3; ++r)
          pg = clip(pg, coef_tau.row(r).transpose(), bound(r));
        if (pg.size() < 3) return;
        // Fan triangulation; each triangle is a collapsed unit square.
        for (std::size_t k = 1; k + 1 < pg.size(); ++k) {
          const Eigen::Vector2d A = pg[0], e1 = pg[k] - pg[0], e2 = pg[k + 1] - pg[k];
          const double area2 = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
          if (!(area2 > 0)) continue;
          out.push_back(Patch{AxisBox{make_point({0.0, 0.0}), make_point({1.0, 1.0})},
                              [to_x, s, A, e1, e2](const Point& uv) {
                                const Eigen::Vector2d tau = A + uv(0) * e1 + uv(0) * uv(1) * e2;
                                return to_x(s, tau);
                              },
                              [area2](const Point& uv) { return area2 * uv(0); }});
        }
      }
    };
    slabs.push_back(std::move(slab));
  }
  return slabs;
}

}  // namespace

std::vector<Slab> decompose(const Domain& dom, const std::optional<AxisBox>& support) {
  if (dom.dim() > kMaxGenericDim)
    throw Error(ErrorCode::DimensionUnsupported,
                "tensor quadrature is limited to n <= 3; use product fields on a half-space product instead");
  if (support && support->dim() != dom.dim())
    throw Error(ErrorCode::DimensionMismatch, "support box dimension differs from the domain");
  return std::visit(Overloaded{
                        [&](const Interval& s) { return box_slabs(AxisBox{make_point({s.lo}), make_point({s.hi})}, support); },
                        [&](const Box& s) { return box_slabs(s.extent, support); },
                        [&](const Ball& s) { return ball_slabs(s, support); },
                        [&](const ConvexPolytope& s) { return polytope_slabs(s, dom.dim(), dom.bounding_box(), support); },
                        [&](const HalfSpaceProduct& s) { return halfspace_slabs(s, support); },
                    },
                    dom.shape());
}

}  // namespace hspw::detail
