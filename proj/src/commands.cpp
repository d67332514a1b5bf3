#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>

#include "hspw/error.hpp"
#include "hspw/field_library.hpp"
#include "hspw/report.hpp"

namespace hspw::lab {

namespace {

// ---- option access -------------------------------------------------------

class Options {
 public:
  explicit Options(Json merged) : j_(std::move(merged)) {}

  const Json& json() const { return j_; }

  const Json& raw(const std::string& key) const {
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) throw UsageError("/" + key, "missing");
    return *it;
  }
  bool present(const std::string& key) const { return j_.contains(key) && !j_[key].is_null(); }

  double number(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_number()) throw UsageError("/" + key, "expected a number, got " + v.dump());
    return v.get<double>();
  }
  int integer(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_number_integer()) throw UsageError("/" + key, "expected an integer, got " + v.dump());
    return v.get<int>();
  }
  bool flag(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_boolean()) throw UsageError("/" + key, "expected true or false");
    return v.get<bool>();
  }
  std::string text(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_string()) throw UsageError("/" + key, "expected a string, got " + v.dump());
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& key) const {
    const Json& v = raw(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array() || v.empty()) throw UsageError("/" + key, "expected a number or a non-empty array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw UsageError("/" + key + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

 private:
  Json j_;
};

Domain domain_of(const Options& o) { return domain_from_json(o.raw("domain"), "/domain"); }

ScalarField field_of(const Options& o, const Domain& dom) {
  const std::string spec = o.text("field");
  try {
    return parse_field(spec, dom);
  } catch (const Error& e) {
    throw UsageError("/field", e.what());
  }
}

SobolevConvention convention_of(const Options& o) {
  const std::string c = o.text("sobolev_convention");
  if (c == "paper") return SobolevConvention::Paper;
  if (c == "standard") return SobolevConvention::Standard;
  throw UsageError("/sobolev_convention", "expected 'paper' or 'standard'");
}

double parse_double(std::string_view s, const std::string& path) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size())
    throw UsageError(path, "cannot read a number from '" + std::string(s) + "'");
  return v;
}

std::vector<double> comma_numbers(std::string_view s, const std::string& path) {
  std::vector<double> out;
  while (true) {
    const auto c = s.find(',');
    out.push_back(parse_double(s.substr(0, c), path));
    if (c == std::string_view::npos) break;
    s.remove_prefix(c + 1);
  }
  return out;
}

void require_settled(const NormValue& v, const std::string& what) {
  if (!v.converged && !v.divergent_flag) {
    std::ostringstream os;
    os << what << " = " << v.value << " has error estimate " << v.error_estimate << " above tolerance";
    throw Error(ErrorCode::NoConvergence, os.str());
  }
}

std::string cell(double v) { return format_number(v); }
std::string cell(bool v) { return v ? "true" : "false"; }

struct Ran {
  Json result;
  Table table;
  int exit_code = kExitOk;
  std::string status = "ok";
};

// ---- commands ------------------------------------------------------------

Ran cmd_norm(const Options& o, const QuadratureConfig& cfg) {
  const Domain dom = domain_of(o);
  const ScalarField u = field_of(o, dom);
  const std::string q = o.text("quantity");
  const double alpha = o.number("alpha"), p = o.number("p");
  Ran r;
  Json res = {{"quantity", q}};
  std::optional<NormValue> nv;
  if (q == "lp") {
    nv = weighted_lp_norm(u, dom, alpha, p, cfg);
  } else if (q == "gradient") {
    nv = gradient_lp_norm(u, dom, alpha, p, cfg);
  } else if (q == "hardy") {
    nv = distance_weighted_norm(u, dom, p + alpha, p, cfg);
    nv->alpha = alpha;
  } else if (q == "distance") {
    nv = distance_weighted_norm(u, dom, o.present("exponent") ? o.number("exponent") : alpha, p, cfg);
  } else if (q == "sobolev") {
    res["value"] = sobolev_norm(u, dom, p, cfg, convention_of(o));
  } else if (q == "tail") {
    res["value"] = tail_function(u, dom, alpha, o.number("level"), cfg);
  } else {
    throw UsageError("/quantity", "expected lp, gradient, hardy, distance, sobolev or tail");
  }
  if (nv) {
    res.update(to_json(*nv));
    if (o.flag("strict")) require_settled(*nv, q + " norm");
    if (nv->divergent_flag) {
      r.exit_code = kExitDivergent;
      r.status = "divergent";
    }
    r.table = {{"quantity", "p", "alpha", "value", "error_estimate", "converged", "divergent"},
               {{q, cell(nv->p), cell(nv->alpha), cell(nv->value), cell(nv->error_estimate), cell(nv->converged),
                 cell(nv->divergent_flag)}}};
  } else {
    r.table = {{"quantity", "p", "alpha", "value"}, {{q, cell(p), cell(alpha), cell(res["value"].get<double>())}}};
  }
  r.result = res;
  return r;
}

Ran cmd_gls(const Options& o, const QuadratureConfig& cfg) {
  const Domain dom = domain_of(o);
  const ScalarField u = field_of(o, dom);
  const double alpha = o.number("alpha");
  GeneratingFunction psi = [&] {
    try {
      return parse_generating_function(o.text("psi"), &u, dom, alpha, cfg);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError || e.code() == ErrorCode::InvalidGeneratingFunction ||
          e.code() == ErrorCode::IoError)
        throw UsageError("/psi", e.what());
      throw;
    }
  }();
  const PGrid grid = gls_pgrid(dom.dim(), alpha, psi, o.integer("grid_count"), o.number("p_cap"));
  Ran r;
  r.result = {{"psi", psi.description()}, {"grid", grid.points}, {"grid_capped", grid.capped}};
  if (o.flag("check_theorem")) {
    const Theorem21Report t = check_theorem_2_1(u, dom, alpha, psi, grid, cfg);
    r.result["theorem"] = to_json(t);
    r.table.columns = {"p", "lhs_ratio", "rhs_ratio", "holds"};
    for (const auto& c : t.certificate) r.table.rows.push_back({cell(c.p), cell(c.lhs_ratio), cell(c.rhs_ratio), cell(c.holds)});
    if (o.flag("strict")) {
      for (const auto* g : {&t.lhs, &t.rhs})
        for (const auto& s : g->samples) require_settled(s.norm, "norm at p = " + format_number(s.p));
    }
    const bool ok = t.pass && t.certificate_pass;
    r.status = ok ? "pass" : "fail";
    if (!ok) r.exit_code = kExitCheckFailed;
    return r;
  }
  const std::string of = o.text("of");
  ScalarField f;
  if (of == "field") f = u;
  else if (of == "gradient") f = gradient_magnitude(u, dom);
  else if (of == "hardy") f = apply_hardy_operator(u, dom);
  else throw UsageError("/of", "expected field, gradient or hardy");
  f.name = of + "(" + u.name + ")";
  const GlsResult g = gls_norm(f, dom, alpha, psi, grid, cfg);
  if (o.flag("strict"))
    for (const auto& s : g.samples) require_settled(s.norm, "norm at p = " + format_number(s.p));
  r.result["gls"] = to_json(g);
  r.table.columns = {"p", "norm", "psi", "ratio"};
  for (const auto& s : g.samples) r.table.rows.push_back({cell(s.p), cell(s.norm.value), cell(s.psi), cell(s.ratio)});
  return r;
}

Ran cmd_verify(const Options& o, const QuadratureConfig& cfg) {
  const Domain dom = domain_of(o);
  const ScalarField u = field_of(o, dom);
  const double alpha = o.number("alpha");
  std::vector<double> ps = o.numbers("p");
  std::sort(ps.begin(), ps.end());
  Ran r;
  Json reports = Json::array();
  bool failed = false, divergent = false;
  r.table.columns = {"p", "alpha", "n", "lhs", "rhs", "K", "ratio", "slack", "pass"};
  for (double p : ps) {
    const HspwReport h = verify_hspw(u, dom, alpha, p, cfg);
    if (o.flag("strict") && !h.converged) {
      require_settled(h.lhs, "lhs at p = " + format_number(p));
      require_settled(h.rhs, "rhs at p = " + format_number(p));
    }
    reports.push_back(to_json(h));
    failed = failed || (h.status == HspwStatus::Ok && !h.pass);
    divergent = divergent || h.status == HspwStatus::RhsDivergent || h.status == HspwStatus::LhsDivergent;
    r.table.rows.push_back({cell(h.p), cell(h.alpha), std::to_string(h.n), cell(h.lhs.value), cell(h.rhs.value), cell(h.K),
                            cell(h.ratio), cell(h.slack), cell(h.pass)});
  }
  r.result = {{"reports", reports}, {"all_pass", !failed && !divergent}};
  if (failed) {
    r.exit_code = kExitCheckFailed;
    r.status = "fail";
  } else if (divergent) {
    r.exit_code = kExitDivergent;
    r.status = "divergent";
  } else {
    r.status = "pass";
  }
  return r;
}

TrialFamily family_of(const Options& o, const Domain& dom) {
  const std::string spec = o.text("family");
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  try {
    if (head == "profile") {
      if (arg.empty()) return power_profile_family(dom);
      const auto v = comma_numbers(arg, "/family");
      if (v.size() != 4) throw UsageError("/family", "profile family takes beta_lo,beta_hi,M_lo,M_hi");
      return power_profile_family(dom, v[0], v[1], v[2], v[3]);
    }
    if (head == "field") return single_member_family(parse_field(arg, dom));
    if (head == "constant") {
      if (arg.empty()) return constant_family();
      const auto v = comma_numbers(arg, "/family");
      if (v.size() != 2) throw UsageError("/family", "constant family takes lo,hi");
      return constant_family(v[0], v[1]);
    }
  } catch (const Error& e) {
    throw UsageError("/family", e.what());
  }
  throw UsageError("/family", "expected profile[:beta_lo,beta_hi,M_lo,M_hi], field:<spec> or constant[:lo,hi]");
}

Ran cmd_sharpness(const Options& o, const QuadratureConfig& cfg) {
  const Domain dom = domain_of(o);
  const TrialFamily fam = family_of(o, dom);
  SharpnessConfig s;
  s.budget = o.integer("budget");
  s.restarts = o.integer("restarts");
  const int seed = o.integer("seed");
  if (seed < 0) throw UsageError("/seed", "expected a non-negative integer");
  s.seed = static_cast<std::uint64_t>(seed);
  const SharpnessResult res = sharpness_search(fam, dom, o.number("alpha"), o.number("p"), cfg, s);
  Ran r;
  r.result = to_json(res);
  r.result["family"] = fam.description;
  r.table.columns = {"evaluation"};
  for (int i = 0; i < fam.dim(); ++i) r.table.columns.push_back("theta_" + std::to_string(i));
  r.table.columns.insert(r.table.columns.end(), {"ratio", "status"});
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    for (double t : res.trace[i].theta) row.push_back(cell(t));
    row.push_back(cell(res.trace[i].ratio));
    row.push_back(std::string(to_string(res.trace[i].status)));
    r.table.rows.push_back(std::move(row));
  }
  // a ratio above K would contradict the inequality on this domain
  if (res.best_ratio > res.K * (1.0 + res.tol_slack)) {
    r.exit_code = kExitCheckFailed;
    r.status = "fail";
  }
  return r;
}

Factor factor_of(const std::string& spec, const std::string& path) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw UsageError(path, "expected polybump:lo,hi[,power] or bump:lo,hi");
  const std::string head = spec.substr(0, colon);
  const auto v = comma_numbers(std::string_view(spec).substr(colon + 1), path);
  try {
    if (head == "polybump" && (v.size() == 2 || v.size() == 3)) {
      const double pw = v.size() == 3 ? v[2] : 2.0;
      if (pw != std::floor(pw) || pw < 1) throw UsageError(path, "polybump power must be a positive integer");
      return poly_bump_factor(v[0], v[1], static_cast<int>(pw));
    }
    if (head == "bump" && v.size() == 2) return smooth_bump_factor(v[0], v[1]);
  } catch (const Error& e) {
    throw UsageError(path, e.what());
  }
  throw UsageError(path, "expected polybump:lo,hi[,power] or bump:lo,hi");
}

Ran cmd_dilation(const Options& o, const QuadratureConfig& cfg) {
  const Domain dom = domain_of(o);
  const auto* hs = std::get_if<HalfSpaceProduct>(&dom.shape());
  if (!hs) throw UsageError("/domain/type", "dilation experiments need a halfspace_product domain");
  const Json& fj = o.raw("factors");
  if (!fj.is_array()) throw UsageError("/factors", "expected an array of factor specs");
  ProductField u;
  for (std::size_t i = 0; i < fj.size(); ++i) {
    const std::string path = "/factors/" + std::to_string(i);
    if (!fj[i].is_string()) throw UsageError(path, "expected a string");
    u.factors.push_back(factor_of(fj[i].get<std::string>(), path));
  }
  if (u.dim() != dom.dim())
    throw UsageError("/factors", "need one factor per coordinate (" + std::to_string(dom.dim()) + ")");
  ExponentConfig e;
  e.p = o.number("p");
  e.q = o.number("q");
  e.a = o.number("a");
  e.h = o.number("h");
  e.n = dom.dim();
  e.free_dims = hs->free_dims;
  e.positive_dims = hs->positive_dims;
  const std::string ps = o.text("path");
  ProductPath path = ProductPath::Auto;
  if (ps == "factorized") path = ProductPath::Factorized;
  else if (ps == "generic") path = ProductPath::Generic;
  else if (ps != "auto") throw UsageError("/path", "expected auto, factorized or generic");
  const std::vector<double> lambdas = o.present("lambdas") ? o.numbers("lambdas") : default_lambda_grid();

  Ran r;
  DilationReport rep;
  if (o.flag("probe")) {
    const NecessityReport n = necessity_probe(u, dom, e, lambdas, cfg, path);
    rep = n.scaling;
    r.result["necessity"] = to_json(n);
  } else {
    rep = verify_scaling_laws(u, dom, e, lambdas, cfg, path);
  }
  r.result["scaling"] = to_json(rep);
  r.result["field"] = u.field().name;
  if (o.flag("strict")) {
    for (std::size_t i = 0; i < rep.lambdas.size(); ++i) {
      require_settled(rep.L_values[i], "L at lambda = " + format_number(rep.lambdas[i]));
      require_settled(rep.R_values[i], "R at lambda = " + format_number(rep.lambdas[i]));
    }
  }
  r.table.columns = {"lambda", "L", "R", "ratio"};
  for (std::size_t i = 0; i < rep.lambdas.size(); ++i) {
    r.table.rows.push_back({cell(rep.lambdas[i]), cell(rep.L_values[i].value), cell(rep.R_values[i].value),
                            cell(rep.L_values[i].value / rep.R_values[i].value)});
  }
  const bool degenerate = rep.insufficient_data || rep.trivial_grid;
  const bool ok = rep.pointwise_pass && (degenerate || rep.slopes_match);
  r.status = ok ? "pass" : "fail";
  if (!ok) r.exit_code = kExitCheckFailed;
  return r;
}

Ran cmd_exponents(const Options& o, const QuadratureConfig&) {
  ExponentConfig e;
  e.n = o.integer("n");
  e.p = o.number("p");
  e.q = o.number("q");
  e.a = o.number("a");
  e.h = o.number("h");
  e.free_dims = e.positive_dims = 0;
  std::optional<Unknown> solve;
  if (o.present("solve")) {
    const std::string s = o.text("solve");
    if (s == "a") solve = Unknown::A;
    else if (s == "h") solve = Unknown::H;
    else if (s == "p") solve = Unknown::P;
    else if (s == "q") solve = Unknown::Q;
    else throw UsageError("/solve", "expected a, h, p or q");
  }
  const ExponentSolution s = exponent_relation(e, solve);
  Ran r;
  r.result = to_json(s);
  r.table = {{"n", "p", "q", "a", "h", "residual"},
             {{std::to_string(s.config.n), cell(s.config.p), cell(s.config.q), cell(s.config.a), cell(s.config.h),
               cell(s.residual)}}};
  return r;
}

Json shared_defaults() {
  return {{"quadrature", to_json(QuadratureConfig{})}, {"strict", false}, {"seed", 1}, {"sobolev_convention", "paper"}};
}

int exit_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::GlsDivergent:
    case ErrorCode::InfeasibleFamily:
    case ErrorCode::UnboundedIntegrand:
      return kExitDivergent;
    default:
      return kExitUsage;
  }
}

Outcome run_batch(const Json& merged);

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"norm", "gls-norm", "hspw-verify", "sharpness", "dilation", "exponents", "report"};
  return c;
}

Json default_options(const std::string& command) {
  Json d = shared_defaults();
  if (command == "norm") {
    d.update({{"domain", nullptr}, {"field", nullptr}, {"alpha", 0.0}, {"p", 2.0}, {"quantity", "lp"},
              {"exponent", nullptr}, {"level", 0.5}});
  } else if (command == "gls-norm") {
    d.update({{"domain", nullptr}, {"field", nullptr}, {"alpha", 0.0}, {"psi", "power:2"}, {"of", "gradient"},
              {"grid_count", 24}, {"p_cap", 64.0}, {"check_theorem", false}});
  } else if (command == "hspw-verify") {
    d.update({{"domain", nullptr}, {"field", nullptr}, {"alpha", 0.0}, {"p", Json::array({2.0})}});
  } else if (command == "sharpness") {
    d.update({{"domain", nullptr}, {"alpha", 0.0}, {"p", 2.0}, {"family", "profile"}, {"budget", 500}, {"restarts", 5}});
  } else if (command == "dilation") {
    d.update({{"domain", nullptr}, {"factors", nullptr}, {"p", 2.0}, {"q", 2.0}, {"a", 0.0}, {"h", 0.0},
              {"lambdas", default_lambda_grid()}, {"probe", false}, {"path", "auto"}});
  } else if (command == "exponents") {
    d.update({{"n", nullptr}, {"p", 2.0}, {"q", 2.0}, {"a", 0.0}, {"h", 0.0}, {"solve", nullptr}});
  } else if (command == "report") {
    d.update({{"runs", Json::array()}});
  } else {
    throw UsageError("/command", "unknown command '" + command + "'");
  }
  return d;
}

Outcome run(const std::string& command, const Json& options) {
  Outcome out;
  out.report = {{"schema", kSchema}, {"command", command}};
  Json merged;
  try {
    merged = default_options(command);
    if (!options.is_null() && !options.is_object()) throw UsageError("", "options must be a JSON object");
    if (options.is_object()) {
      for (auto it = options.begin(); it != options.end(); ++it) {
        if (!merged.contains(it.key())) throw UsageError("/" + it.key(), "unknown option for " + command);
        if (it.key() == "quadrature" && it->is_object()) merged["quadrature"].update(*it);
        else merged[it.key()] = *it;
      }
    }
    const QuadratureConfig cfg = quadrature_from_json(merged["quadrature"], "/quadrature");
    merged["quadrature"] = to_json(cfg);
    out.report["config"] = merged;
    if (command == "report") {
      Outcome batch = run_batch(merged);
      batch.report["config"] = merged;
      batch.report["exit_code"] = batch.exit_code;
      return batch;
    }

    const Options o(merged);
    Ran r;
    if (command == "norm") r = cmd_norm(o, cfg);
    else if (command == "gls-norm") r = cmd_gls(o, cfg);
    else if (command == "hspw-verify") r = cmd_verify(o, cfg);
    else if (command == "sharpness") r = cmd_sharpness(o, cfg);
    else if (command == "dilation") r = cmd_dilation(o, cfg);
    else r = cmd_exponents(o, cfg);
    out.report["result"] = r.result;
    out.report["status"] = r.status;
    out.table = std::move(r.table);
    out.exit_code = r.exit_code;
  } catch (const UsageError& e) {
    out.report["error"] = {{"code", "UsageError"}, {"path", e.path()}, {"message", e.what()}};
    out.report["status"] = "error";
    out.exit_code = kExitUsage;
  } catch (const Error& e) {
    out.report["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    out.exit_code = exit_for(e);
    out.report["status"] = out.exit_code == kExitDivergent ? "divergent" : "error";
  }
  if (!out.report.contains("config")) out.report["config"] = merged.is_null() ? Json::object() : merged;
  out.report["exit_code"] = out.exit_code;
  return out;
}

namespace {

Outcome run_batch(const Json& merged) {
  const Json& runs = merged["runs"];
  if (!runs.is_array() || runs.empty()) throw UsageError("/runs", "expected a non-empty array of runs");
  Outcome out;
  out.report = {{"schema", kSchema}, {"command", "report"}};
  Json results = Json::array();
  int code = kExitOk;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string path = "/runs/" + std::to_string(i);
    if (!runs[i].is_object() || !runs[i].contains("command") || !runs[i]["command"].is_string())
      throw UsageError(path + "/command", "each run needs a command string");
    const std::string c = runs[i]["command"].get<std::string>();
    if (c == "report") throw UsageError(path + "/command", "reports do not nest");
    Json opts = runs[i];
    opts.erase("command");
    // shared settings flow down unless the run overrides them
    for (const char* k : {"strict", "seed", "sobolev_convention"})
      if (!opts.contains(k)) opts[k] = merged[k];
    if (!opts.contains("quadrature")) opts["quadrature"] = merged["quadrature"];
    Outcome sub = run(c, opts);
    code = std::max(code, sub.exit_code);
    results.push_back(std::move(sub.report));
  }
  out.report["result"] = {{"runs", results}};
  out.report["status"] = code == kExitOk ? "ok" : (code == kExitCheckFailed ? "fail" : (code == kExitDivergent ? "divergent" : "error"));
  out.exit_code = code;
  return out;
}

}  // namespace

}  // namespace hspw::lab
