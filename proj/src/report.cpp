#include "hspw/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hspw/error.hpp"

namespace hspw::lab {

namespace {

const Json& member(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw UsageError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw UsageError(path + "/" + key, "missing");
  return *it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw UsageError(path, "expected a number, got " + j.dump());
  return j.get<double>();
}

int integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw UsageError(path, "expected an integer, got " + j.dump());
  return j.get<int>();
}

Point vector_of(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw UsageError(path, "expected a non-empty array of numbers");
  if (j.size() > static_cast<std::size_t>(kMaxDim))
    throw UsageError(path, "at most " + std::to_string(kMaxDim) + " coordinates are supported");
  Point p(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) p(static_cast<Eigen::Index>(i)) = number(j[i], path + "/" + std::to_string(i));
  return p;
}

// library errors raised while building a domain belong to the domain path
template <class F>
auto at_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw UsageError(path, e.what());
  }
}

}  // namespace

Domain domain_from_json(const Json& j, const std::string& path) {
  const Json& type = member(j, "type", path);
  if (!type.is_string()) throw UsageError(path + "/type", "expected a string");
  const std::string t = type.get<std::string>();
  if (t == "interval") {
    const double lo = number(member(j, "lo", path), path + "/lo");
    const double hi = number(member(j, "hi", path), path + "/hi");
    return at_path(path, [&] { return Domain::interval(lo, hi); });
  }
  if (t == "box") {
    const Point lo = vector_of(member(j, "lo", path), path + "/lo");
    const Point hi = vector_of(member(j, "hi", path), path + "/hi");
    return at_path(path, [&] { return Domain::box(lo, hi); });
  }
  if (t == "ball") {
    const Point c = vector_of(member(j, "center", path), path + "/center");
    const double r = number(member(j, "radius", path), path + "/radius");
    return at_path(path, [&] { return Domain::ball(c, r); });
  }
  if (t == "polytope") {
    const Json& faces = member(j, "faces", path);
    if (!faces.is_array()) throw UsageError(path + "/faces", "expected an array");
    std::vector<Face> fs;
    for (std::size_t i = 0; i < faces.size(); ++i) {
      const std::string fp = path + "/faces/" + std::to_string(i);
      fs.push_back({vector_of(member(faces[i], "normal", fp), fp + "/normal"),
                    number(member(faces[i], "offset", fp), fp + "/offset")});
    }
    return at_path(path, [&] { return Domain::polytope(fs); });
  }
  if (t == "halfspace_product") {
    const int d = integer(member(j, "d", path), path + "/d");
    const int r = integer(member(j, "r", path), path + "/r");
    const Json& tr = member(j, "truncation", path);
    const AxisBox box{vector_of(member(tr, "lo", path + "/truncation"), path + "/truncation/lo"),
                      vector_of(member(tr, "hi", path + "/truncation"), path + "/truncation/hi")};
    return at_path(path, [&] { return Domain::halfspace_product(d, r, box); });
  }
  throw UsageError(path + "/type", "unknown domain type '" + t + "'");
}

QuadratureConfig quadrature_from_json(const Json& j, const std::string& path) {
  QuadratureConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw UsageError(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const std::string kp = path + "/" + k;
    if (k == "base_order") cfg.base_order = integer(*it, kp);
    else if (k == "grading_ratio") cfg.grading_ratio = number(*it, kp);
    else if (k == "max_depth") cfg.max_depth = integer(*it, kp);
    else if (k == "rel_tol") cfg.rel_tol = number(*it, kp);
    else if (k == "abs_tol") cfg.abs_tol = number(*it, kp);
    else if (k == "divergence_growth_threshold") cfg.divergence_growth_threshold = number(*it, kp);
    else if (k == "divergence_window") cfg.divergence_window = integer(*it, kp);
    else if (k == "max_bisections") cfg.max_bisections = integer(*it, kp);
    else throw UsageError(kp, "unknown quadrature setting");
  }
  at_path(path, [&] {
    cfg.validate();
    return 0;
  });
  return cfg;
}

Json to_json(const QuadratureConfig& cfg) {
  return {{"base_order", cfg.base_order},
          {"grading_ratio", cfg.grading_ratio},
          {"max_depth", cfg.max_depth},
          {"rel_tol", cfg.rel_tol},
          {"abs_tol", cfg.abs_tol},
          {"divergence_growth_threshold", cfg.divergence_growth_threshold},
          {"divergence_window", cfg.divergence_window},
          {"max_bisections", cfg.max_bisections}};
}

Json to_json(const NormValue& v) {
  return {{"value", v.value},       {"p", v.p},
          {"alpha", v.alpha},       {"error_estimate", v.error_estimate},
          {"divergent", v.divergent_flag}, {"converged", v.converged}};
}

Json to_json(const HspwReport& r) {
  return {{"p", r.p},
          {"alpha", r.alpha},
          {"n", r.n},
          {"lhs", to_json(r.lhs)},
          {"rhs", to_json(r.rhs)},
          {"K", r.K},
          {"ratio", r.ratio},
          {"slack", r.slack},
          {"tol_slack", r.tol_slack},
          {"pass", r.pass},
          {"converged", r.converged},
          {"status", std::string(to_string(r.status))}};
}

Json to_json(const GlsResult& r) {
  Json samples = Json::array();
  for (const auto& s : r.samples)
    samples.push_back({{"p", s.p}, {"norm", to_json(s.norm)}, {"psi", s.psi}, {"ratio", s.ratio}});
  return {{"value", r.value},
          {"argmax_p", r.argmax_p},
          {"at_cap", r.at_cap},
          {"refined", r.refined},
          {"error_estimate", r.error_estimate},
          {"samples", samples}};
}

Json to_json(const Theorem21Report& r) {
  Json cert = Json::array();
  for (const auto& c : r.certificate)
    cert.push_back({{"p", c.p}, {"lhs_ratio", c.lhs_ratio}, {"rhs_ratio", c.rhs_ratio}, {"holds", c.holds}});
  return {{"lhs", to_json(r.lhs)},         {"rhs", to_json(r.rhs)},
          {"ratio", r.ratio},              {"tol_slack", r.tol_slack},
          {"vacuous", r.vacuous},          {"pass", r.pass},
          {"certificate_pass", r.certificate_pass}, {"certificate", cert}};
}

Json to_json(const SharpnessResult& r) {
  Json trace = Json::array();
  for (const auto& e : r.trace)
    trace.push_back({{"theta", e.theta}, {"ratio", e.ratio}, {"status", std::string(to_string(e.status))}});
  return {{"best_ratio", r.best_ratio},
          {"best_theta", r.best_theta},
          {"K", r.K},
          {"gap_to_K", r.gap_to_K},
          {"tol_slack", r.tol_slack},
          {"evaluations", r.evaluations},
          {"restarts_completed", r.restarts_completed},
          {"budget_exhausted", r.budget_exhausted},
          {"trace", trace}};
}

Json to_json(const DilationReport& r) {
  Json L = Json::array(), R = Json::array();
  for (const auto& v : r.L_values) L.push_back(to_json(v));
  for (const auto& v : r.R_values) R.push_back(to_json(v));
  return {{"lambdas", r.lambdas},
          {"L_values", L},
          {"R_values", R},
          {"fitted_L_slope", r.fitted_L_slope},
          {"fitted_R_slope", r.fitted_R_slope},
          {"predicted_L_slope", r.predicted_L_slope},
          {"predicted_R_slope", r.predicted_R_slope},
          {"relation_residual", r.relation_residual},
          {"empirical_G", r.empirical_G},
          {"max_pointwise_L_deviation", r.max_pointwise_L_deviation},
          {"max_pointwise_R_deviation", r.max_pointwise_R_deviation},
          {"pointwise_pass", r.pointwise_pass},
          {"slopes_match", r.slopes_match},
          {"trivial_grid", r.trivial_grid},
          {"insufficient_data", r.insufficient_data},
          {"factorized", r.factorized}};
}

Json to_json(const NecessityReport& r) {
  return {{"lambdas", r.lambdas},
          {"ratios", r.ratios},
          {"ratio_slope", r.ratio_slope},
          {"residual", r.residual},
          {"slope_error", r.slope_error},
          {"empirical_G", r.empirical_G},
          {"consistent", r.consistent},
          {"insufficient_data", r.insufficient_data}};
}

Json to_json(const ExponentSolution& s) {
  Json j = {{"residual", s.residual},
            {"config",
             {{"p", s.config.p}, {"q", s.config.q}, {"a", s.config.a}, {"h", s.config.h}, {"n", s.config.n}}}};
  if (s.solved) {
    j["solved_for"] = std::string(to_string(*s.solved));
    j["value"] = s.value;
  } else {
    j["solved_for"] = nullptr;
  }
  return j;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string render_csv(const Table& t) {
  std::ostringstream os;
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(t.columns);
  for (const auto& r : t.rows) line(r);
  return os.str();
}

void emit_sweep_table(const Table& t, const std::string& path) {
  if (t.rows.empty()) throw Error(ErrorCode::InvalidConfig, "refusing to write an empty table to " + path);
  for (const auto& r : t.rows) {
    if (r.size() != t.columns.size())
      throw Error(ErrorCode::InvalidConfig, "table row has " + std::to_string(r.size()) + " cells, header has " +
                                                std::to_string(t.columns.size()));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << render_csv(t);
  if (!out) throw Error(ErrorCode::IoError, "write to " + path + " failed");
}

}  // namespace hspw::lab
