#include "hspw/domain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <Eigen/LU>

#include "hspw/error.hpp"

namespace hspw {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void for_each_subset(int m, int k, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (k > m) return;
  for (;;) {
    visit(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

void require_finite(const Point& p, const char* what) {
  if (!p.allFinite()) throw Error(ErrorCode::DegenerateDomain, std::string(what) + " has non-finite entries");
}

void check_dim(const Domain& dom, const Point& x) {
  if (x.size() != dom.dim()) {
    std::ostringstream os;
    os << "point of dimension " << x.size() << " for a " << dom.dim() << "-dimensional " << dom.kind();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

Eigen::MatrixXd face_matrix(const ConvexPolytope& poly, int n) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(poly.faces.size()), n);
  for (std::size_t j = 0; j < poly.faces.size(); ++j) a.row(static_cast<Eigen::Index>(j)) = poly.faces[j].normal.transpose();
  return a;
}

Eigen::VectorXd face_offsets(const ConvexPolytope& poly) {
  Eigen::VectorXd b(static_cast<Eigen::Index>(poly.faces.size()));
  for (std::size_t j = 0; j < poly.faces.size(); ++j) b(static_cast<Eigen::Index>(j)) = poly.faces[j].offset;
  return b;
}

// A nonzero direction v with A v <= 0 means the polytope is unbounded. If the
// recession cone is pointed and nontrivial it has an extreme ray lying on n-1
// independent constraint planes, so it suffices to test those lines.
bool is_unbounded(const Eigen::MatrixXd& a) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  bool unbounded = false;
  auto test = [&](const Eigen::VectorXd& v) {
    for (double sign : {1.0, -1.0}) {
      if (((sign * a * v).array() <= 1e-12).all()) unbounded = true;
    }
  };
  if (n == 1) {
    test(Eigen::VectorXd::Ones(1));
    return unbounded;
  }
  for_each_subset(m, n - 1, [&](const std::vector<int>& s) {
    if (unbounded) return;
    Eigen::MatrixXd sub(n - 1, n);
    for (int i = 0; i < n - 1; ++i) sub.row(i) = a.row(s[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    const Eigen::MatrixXd ker = lu.kernel();
    if (ker.cols() == 1 && ker.norm() > 0) test(ker.col(0).normalized());
  });
  return unbounded;
}

}  // namespace

std::vector<Eigen::VectorXd> enumerate_vertices(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  std::vector<Eigen::VectorXd> out;
  for_each_subset(m, n, [&](const std::vector<int>& s) {
    Eigen::MatrixXd sub(n, n);
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
      sub.row(i) = a.row(s[static_cast<std::size_t>(i)]);
      rhs(i) = b(s[static_cast<std::size_t>(i)]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    if (lu.rank() < n) return;
    const Eigen::VectorXd z = lu.solve(rhs);
    if (!z.allFinite()) return;
    const Eigen::VectorXd slack = b - a * z;
    for (int j = 0; j < m; ++j) {
      if (slack(j) < -tol * (1.0 + std::abs(b(j)))) return;
    }
    for (const auto& v : out) {
      if ((v - z).norm() <= tol * (1.0 + z.norm())) return;
    }
    out.push_back(z);
  });
  return out;
}

Domain::Domain(DomainShape shape) : shape_(std::move(shape)) {
  std::visit(
      Overloaded{
          [&](const Interval& s) {
            if (!(std::isfinite(s.lo) && std::isfinite(s.hi) && s.lo < s.hi))
              throw Error(ErrorCode::DegenerateDomain, "interval needs finite lo < hi");
            dim_ = 1;
            bbox_ = {make_point({s.lo}), make_point({s.hi})};
            interior_ = make_point({0.5 * (s.lo + s.hi)});
          },
          [&](const Box& s) {
            const auto& e = s.extent;
            if (e.lo.size() == 0 || e.lo.size() != e.hi.size())
              throw Error(ErrorCode::DegenerateDomain, "box lo/hi sizes differ or are empty");
            if (e.lo.size() > kMaxDim) throw Error(ErrorCode::DimensionUnsupported, "box dimension above limit");
            require_finite(e.lo, "box lo");
            require_finite(e.hi, "box hi");
            if (!(e.lo.array() < e.hi.array()).all()) throw Error(ErrorCode::DegenerateDomain, "box needs lo < hi on every axis");
            dim_ = e.dim();
            bbox_ = e;
            interior_ = 0.5 * (e.lo + e.hi);
          },
          [&](const Ball& s) {
            if (s.center.size() == 0 || s.center.size() > kMaxDim)
              throw Error(ErrorCode::DegenerateDomain, "ball center has unsupported dimension");
            require_finite(s.center, "ball center");
            if (!(s.radius > 0) || !std::isfinite(s.radius))
              throw Error(ErrorCode::DegenerateDomain, "ball radius must be positive");
            dim_ = static_cast<int>(s.center.size());
            bbox_ = {s.center.array() - s.radius, s.center.array() + s.radius};
            interior_ = s.center;
          },
          [&](ConvexPolytope& s) {
            if (s.faces.empty()) throw Error(ErrorCode::DegenerateDomain, "polytope without faces");
            const auto n = s.faces.front().normal.size();
            if (n == 0 || n > kMaxDim) throw Error(ErrorCode::DegenerateDomain, "polytope normals have unsupported dimension");
            for (auto& f : s.faces) {
              if (f.normal.size() != n) throw Error(ErrorCode::DegenerateDomain, "polytope normals of mixed dimension");
              require_finite(f.normal, "face normal");
              const double len = f.normal.norm();
              if (!(len > 0) || !std::isfinite(f.offset))
                throw Error(ErrorCode::DegenerateDomain, "face with zero normal or non-finite offset");
              f.normal /= len;
              f.offset /= len;
            }
            dim_ = static_cast<int>(n);
            const Eigen::MatrixXd a = face_matrix(s, dim_);
            const Eigen::VectorXd b = face_offsets(s);
            if (is_unbounded(a)) throw Error(ErrorCode::DegenerateDomain, "polytope is unbounded");
            const auto verts = enumerate_vertices(a, b);
            if (verts.empty()) throw Error(ErrorCode::DegenerateDomain, "polytope is empty");
            Eigen::VectorXd lo = verts.front(), hi = verts.front(), mean = Eigen::VectorXd::Zero(dim_);
            for (const auto& v : verts) {
              lo = lo.cwiseMin(v);
              hi = hi.cwiseMax(v);
              mean += v;
            }
            mean /= static_cast<double>(verts.size());
            const double scale = (hi - lo).maxCoeff();
            if (!(((b - a * mean).array() > 1e-12 * (1.0 + scale)).all()))
              throw Error(ErrorCode::DegenerateDomain, "polytope has empty interior");
            bbox_ = {lo, hi};
            interior_ = mean;
          },
          [&](const HalfSpaceProduct& s) {
            if (s.free_dims < 1 || s.positive_dims < 1)
              throw Error(ErrorCode::DegenerateDomain, "half-space product needs d >= 1 and r >= 1");
            const int n = s.free_dims + s.positive_dims;
            if (n > kMaxDim) throw Error(ErrorCode::DimensionUnsupported, "half-space product dimension above limit");
            const auto& t = s.truncation;
            if (t.lo.size() != n || t.hi.size() != n)
              throw Error(ErrorCode::DegenerateDomain, "truncation box dimension must equal d + r");
            require_finite(t.lo, "truncation lo");
            require_finite(t.hi, "truncation hi");
            if (!(t.lo.array() < t.hi.array()).all())
              throw Error(ErrorCode::DegenerateDomain, "truncation box needs lo < hi");
            if ((t.lo.tail(s.positive_dims).array() < 0).any())
              throw Error(ErrorCode::DegenerateDomain, "truncation box must lie in the closed half-space y >= 0");
            dim_ = n;
            bbox_ = t;
            interior_ = 0.5 * (t.lo + t.hi);
          },
      },
      shape_);
}

Domain Domain::interval(double lo, double hi) { return Domain(Interval{lo, hi}); }
Domain Domain::box(Point lo, Point hi) { return Domain(Box{AxisBox{std::move(lo), std::move(hi)}}); }
Domain Domain::ball(Point center, double radius) { return Domain(Ball{std::move(center), radius}); }
Domain Domain::polytope(std::vector<Face> faces) { return Domain(ConvexPolytope{std::move(faces)}); }
Domain Domain::halfspace_product(int free_dims, int positive_dims, AxisBox truncation) {
  return Domain(HalfSpaceProduct{free_dims, positive_dims, std::move(truncation)});
}

std::string Domain::kind() const {
  return std::visit(Overloaded{
                        [](const Interval&) { return std::string("interval"); },
                        [](const Box&) { return std::string("box"); },
                        [](const Ball&) { return std::string("ball"); },
                        [](const ConvexPolytope&) { return std::string("polytope"); },
                        [](const HalfSpaceProduct&) { return std::string("halfspace_product"); },
                    },
                    shape_);
}

namespace {

// Signed margin: positive inside, zero on the boundary, negative outside.
double signed_margin(const Domain& dom, const Point& x) {
  return std::visit(Overloaded{
                        [&](const Interval& s) { return std::min(x(0) - s.lo, s.hi - x(0)); },
                        [&](const Box& s) {
                          return std::min((x - s.extent.lo).minCoeff(), (s.extent.hi - x).minCoeff());
                        },
                        [&](const Ball& s) { return s.radius - (x - s.center).norm(); },
                        [&](const ConvexPolytope& s) {
                          double m = std::numeric_limits<double>::infinity();
                          for (const auto& f : s.faces) m = std::min(m, f.offset - f.normal.dot(x));
                          return m;
                        },
                        [&](const HalfSpaceProduct& s) { return x.tail(s.positive_dims).minCoeff(); },
                    },
                    dom.shape());
}

}  // namespace

bool contains(const Domain& dom, const Point& x) {
  if (x.size() != dom.dim()) return false;
  if (!x.allFinite()) return false;
  return signed_margin(dom, x) > 0;
}

double distance_to_boundary(const Domain& dom, const Point& x) {
  check_dim(dom, x);
  const double m = x.allFinite() ? signed_margin(dom, x) : -1.0;
  if (!(m > 0)) {
    std::ostringstream os;
    os << "point (" << x.transpose() << ") is not interior to the " << dom.kind();
    throw Error(ErrorCode::PointOutsideDomain, os.str());
  }
  return m;
}

Point distance_gradient(const Domain& dom, const Point& x) {
  check_dim(dom, x);
  if (!contains(dom, x)) throw Error(ErrorCode::PointOutsideDomain, "distance gradient requested outside the domain");
  Point g = Point::Zero(dom.dim());
  std::visit(Overloaded{
                 [&](const Interval& s) { g(0) = (x(0) - s.lo) <= (s.hi - x(0)) ? 1.0 : -1.0; },
                 [&](const Box& s) {
                   Eigen::Index ilo, ihi;
                   const double mlo = (x - s.extent.lo).minCoeff(&ilo);
                   const double mhi = (s.extent.hi - x).minCoeff(&ihi);
                   if (mlo <= mhi)
                     g(ilo) = 1.0;
                   else
                     g(ihi) = -1.0;
                 },
                 [&](const Ball& s) {
                   const Point r = x - s.center;
                   const double len = r.norm();
                   if (len > 0) g = -r / len;
                 },
                 [&](const ConvexPolytope& s) {
                   std::size_t best = 0;
                   double m = std::numeric_limits<double>::infinity();
                   for (std::size_t j = 0; j < s.faces.size(); ++j) {
                     const double dj = s.faces[j].offset - s.faces[j].normal.dot(x);
                     if (dj < m) {
                       m = dj;
                       best = j;
                     }
                   }
                   g = -s.faces[best].normal;
                 },
                 [&](const HalfSpaceProduct& s) {
                   Eigen::Index j;
                   x.tail(s.positive_dims).minCoeff(&j);
                   g(s.free_dims + j) = 1.0;
                 },
             },
             dom.shape());
  return g;
}

}  // namespace hspw
