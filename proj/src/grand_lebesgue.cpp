#include "hspw/grand_lebesgue.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "hspw/error.hpp"
#include "hspw/numerics.hpp"
#include "hspw/parallel.hpp"

namespace hspw {

namespace {

[[noreturn]] void bad_psi(const std::string& what) { throw Error(ErrorCode::InvalidGeneratingFunction, what); }

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

double read_number(std::string_view text, std::string_view what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw Error(ErrorCode::ParseError, "cannot read " + std::string(what) + " from '" + std::string(text) + "'");
  return v;
}

std::vector<std::pair<double, double>> read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open psi table '" + path + "'");
  std::vector<std::pair<double, double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": expected 'p,value'");
    try {
      rows.emplace_back(read_number(std::string_view(line).substr(0, comma), "p"),
                        read_number(std::string_view(line).substr(comma + 1), "psi value"));
    } catch (const Error&) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw;
    }
  }
  return rows;
}

}  // namespace

GeneratingFunction GeneratingFunction::power(double m) {
  if (!(m > 0)) bad_psi("power psi needs m > 0");
  GeneratingFunction g;
  g.kind_ = Kind::Power;
  g.eval_ = [m](double p) { return std::pow(p, 1.0 / m); };
  g.description_ = "power:" + fmt(m);
  return g;
}

GeneratingFunction GeneratingFunction::log_corrected(double m, double beta, std::function<double(double)> slowly_varying) {
  if (!(m > 0)) bad_psi("log-corrected psi needs m > 0");
  GeneratingFunction g;
  g.kind_ = Kind::LogCorrected;
  g.eval_ = [m, beta, l = std::move(slowly_varying)](double p) {
    const double lg = std::log(p + 1.0);
    const double lv = l ? l(lg) : 1.0;
    if (!(lv > 0) || !std::isfinite(lv)) bad_psi("slowly varying factor must be positive and finite");
    return std::pow(p, 1.0 / m) * std::pow(lg, beta) * lv;
  };
  g.description_ = "logcorr:" + fmt(m) + "," + fmt(beta);
  return g;
}

GeneratingFunction GeneratingFunction::extremal(double r) {
  if (!(r >= 1) || !std::isfinite(r)) bad_psi("extremal psi needs a finite r >= 1");
  GeneratingFunction g;
  g.kind_ = Kind::Extremal;
  g.eval_ = [r](double p) { return p == r ? 1.0 : kInf; };
  g.atoms_ = {r};
  g.description_ = "extremal:" + fmt(r);
  return g;
}

GeneratingFunction GeneratingFunction::natural(const ScalarField& u, const Domain& dom, double alpha,
                                               const QuadratureConfig& cfg) {
  struct Memo {
    std::mutex mutex;
    std::map<double, double> values;
  };
  auto memo = std::make_shared<Memo>();
  GeneratingFunction g;
  g.kind_ = Kind::Natural;
  g.eval_ = [memo, u, dom, alpha, cfg](double p) {
    {
      std::lock_guard lock(memo->mutex);
      if (auto it = memo->values.find(p); it != memo->values.end()) return it->second;
    }
    const NormValue n = gradient_lp_norm(u, dom, alpha, p, cfg);
    const double v = n.divergent_flag ? kInf : n.value;
    std::lock_guard lock(memo->mutex);
    memo->values.emplace(p, v);
    return v;
  };
  g.description_ = "natural";
  return g;
}

GeneratingFunction GeneratingFunction::tabulated(std::vector<std::pair<double, double>> table) {
  if (table.empty()) bad_psi("psi table is empty");
  std::sort(table.begin(), table.end());
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!(table[i].second > 0)) bad_psi("psi table values must be positive (p = " + fmt(table[i].first) + ")");
    if (i > 0 && table[i].first == table[i - 1].first) bad_psi("psi table repeats p = " + fmt(table[i].first));
  }
  GeneratingFunction g;
  g.kind_ = Kind::Tabulated;
  g.upper_ = table.back().first;
  g.eval_ = [t = std::move(table)](double p) {
    if (p < t.front().first || p > t.back().first) return kInf;
    auto hi = std::lower_bound(t.begin(), t.end(), std::make_pair(p, -kInf));
    if (hi->first == p) return hi->second;
    auto lo = std::prev(hi);
    const double w = (p - lo->first) / (hi->first - lo->first);
    return (1 - w) * lo->second + w * hi->second;
  };
  g.description_ = "table";
  return g;
}

GeneratingFunction make_psi_K(const GeneratingFunction& psi, double alpha, int n) {
  GeneratingFunction g = psi;
  g.kind_ = GeneratingFunction::Kind::Scaled;
  g.eval_ = [inner = psi.eval_, alpha, n](double p) {
    const double v = inner(p);
    if (std::isinf(v)) return v;
    return p / (p + alpha - n) * v;
  };
  g.description_ = "K*" + psi.description_;
  return g;
}

GeneratingFunction parse_generating_function(std::string_view spec, const ScalarField* u, const Domain& dom,
                                             double alpha, const QuadratureConfig& cfg) {
  const auto colon = spec.find(':');
  const std::string_view head = spec.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (head == "power") return GeneratingFunction::power(read_number(arg, "psi m"));
  if (head == "extremal") return GeneratingFunction::extremal(read_number(arg, "psi r"));
  if (head == "logcorr") {
    const auto comma = arg.find(',');
    if (comma == std::string_view::npos) throw Error(ErrorCode::ParseError, "logcorr needs 'm,beta'");
    return GeneratingFunction::log_corrected(read_number(arg.substr(0, comma), "psi m"),
                                             read_number(arg.substr(comma + 1), "psi beta"));
  }
  if (head == "natural") {
    if (!u) throw Error(ErrorCode::InvalidGeneratingFunction, "natural psi needs a source field");
    return GeneratingFunction::natural(*u, dom, alpha, cfg);
  }
  if (head == "table") return GeneratingFunction::tabulated(read_table(std::string(arg)));
  throw Error(ErrorCode::ParseError, "unknown generating function '" + std::string(spec) + "'");
}

PGrid make_pgrid(double lower, double upper, int count, double p_max_cap) {
  if (count < 2) throw Error(ErrorCode::InvalidConfig, "a p-grid needs at least 2 points");
  const bool capped = !(upper <= p_max_cap);
  const double hi = capped ? p_max_cap : upper;
  if (!(lower < hi) || !std::isfinite(lower)) {
    throw Error(ErrorCode::EmptyGrid, "p-interval (" + fmt(lower) + ", " + fmt(upper) + ") is empty after capping at " +
                                          fmt(p_max_cap));
  }
  const double span = hi - lower;
  const double first = std::min(1e-3, 1e-3 * span);
  // the cap itself is a legitimate p for an infinite upper end
  const double last = capped ? span : span * (1.0 - 1e-3);
  PGrid g;
  g.lower = lower;
  g.upper = upper;
  g.capped = capped;
  g.endpoint_refinement = 24;
  for (int k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / (count - 1);
    g.points.push_back(lower + first * std::pow(last / first, t));
  }
  g.points.back() = lower + last;
  return g;
}

PGrid gls_pgrid(int n, double alpha, const GeneratingFunction& psi, int count, double p_max_cap) {
  return make_pgrid(std::max(n - alpha, 1.0), psi.upper(), count, p_max_cap);
}

GlsResult gls_norm(const ScalarField& f, const Domain& dom, double alpha, const GeneratingFunction& psi,
                   const PGrid& grid, const QuadratureConfig& cfg) {
  if (grid.points.empty()) throw Error(ErrorCode::EmptyGrid, "p-grid has no points");
  std::vector<double> ps = grid.points;
  for (double a : psi.atoms())
    if (a > grid.lower && a >= 1.0 && a <= grid.points.back()) ps.push_back(a);
  std::sort(ps.begin(), ps.end());
  ps.erase(std::unique(ps.begin(), ps.end()), ps.end());

  auto sample = [&](double p) {
    GlsSample s{p, {}, psi(p), 0.0};
    if (!(s.psi > 0)) bad_psi("psi(" + fmt(p) + ") = " + fmt(s.psi) + " is not positive");
    // psi = inf weighs the whole p out of the sup, even a divergent norm
    if (std::isinf(s.psi)) {
      s.norm.p = p;
      s.norm.alpha = alpha;
      return s;
    }
    s.norm = weighted_lp_norm(f, dom, alpha, p, cfg);
    if (s.norm.divergent_flag)
      throw Error(ErrorCode::GlsDivergent, "||" + f.name + "||_p diverges at p = " + fmt(p));
    s.ratio = s.norm.value / s.psi;
    return s;
  };

  GlsResult res;
  res.samples = parallel_map<GlsSample>(ps.size(), [&](std::size_t i) { return sample(ps[i]); });

  std::size_t best = 0;
  for (std::size_t i = 1; i < res.samples.size(); ++i)
    if (res.samples[i].ratio > res.samples[best].ratio) best = i;
  const GlsSample& top = res.samples[best];
  res.value = top.ratio;
  res.argmax_p = top.p;
  res.error_estimate = std::isinf(top.psi) ? 0.0 : top.norm.error_estimate / top.psi;

  if (psi.continuous() && grid.endpoint_refinement > 0 && res.samples.size() >= 2 && res.value > 0) {
    const double a = res.samples[best == 0 ? 0 : best - 1].p;
    const double b = res.samples[std::min(best + 1, res.samples.size() - 1)].p;
    GlsSample refined_best = top;
    auto ratio = [&](double p) {
      const GlsSample s = sample(p);
      if (s.ratio > refined_best.ratio) refined_best = s;
      return s.ratio;
    };
    golden_section_maximize<double>(ratio, a, b, 1e-6 * (b - a), grid.endpoint_refinement);
    if (refined_best.ratio > res.value) {
      res.value = refined_best.ratio;
      res.argmax_p = refined_best.p;
      res.error_estimate = refined_best.norm.error_estimate / refined_best.psi;
      res.refined = true;
    }
  }
  // the last sample is always the last grid point (atoms never exceed it)
  res.at_cap = grid.capped && best == res.samples.size() - 1;
  return res;
}

Theorem21Report check_theorem_2_1(const ScalarField& u, const Domain& dom, double alpha, const GeneratingFunction& psi,
                                  const PGrid& grid, const QuadratureConfig& cfg) {
  const int n = dom.dim();
  const GeneratingFunction psi_k = make_psi_K(psi, alpha, n);
  Theorem21Report rep;
  rep.rhs = gls_norm(gradient_magnitude(u, dom), dom, alpha, psi, grid, cfg);
  rep.lhs = gls_norm(apply_hardy_operator(u, dom), dom, alpha, psi_k, grid, cfg);

  auto rel = [](const GlsResult& g) { return g.value > 0 ? g.error_estimate / g.value : 0.0; };
  rep.tol_slack = std::max(10.0 * (rel(rep.lhs) + rel(rep.rhs)), cfg.rel_tol);
  rep.vacuous = rep.rhs.value == 0.0;
  rep.ratio = rep.vacuous ? 0.0 : rep.lhs.value / rep.rhs.value;
  rep.pass = rep.vacuous ? rep.lhs.value == 0.0 : rep.lhs.value <= rep.rhs.value * (1.0 + rep.tol_slack);

  rep.certificate_pass = true;
  for (std::size_t i = 0; i < rep.lhs.samples.size(); ++i) {
    const auto& l = rep.lhs.samples[i];
    const auto& r = rep.rhs.samples[i];
    const double slack = std::max(10.0 * (l.norm.error_estimate / std::max(l.norm.value, 1e-300) +
                                          r.norm.error_estimate / std::max(r.norm.value, 1e-300)),
                                  cfg.rel_tol);
    CertificateRow row{l.p, l.ratio, r.ratio, l.ratio <= r.ratio * (1.0 + slack)};
    rep.certificate_pass = rep.certificate_pass && row.holds;
    rep.certificate.push_back(row);
  }
  return rep;
}

}  // namespace hspw
