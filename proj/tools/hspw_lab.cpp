// hspw_lab: command-line front end for the weighted Hardy / Sobolev lab.
//
//   hspw_lab hspw-verify --domain '{"type":"interval","lo":0,"hi":1}' --field 'poly:t*(1-t)' --p 2
//   hspw_lab exponents --n 3 --p 2 --solve q
//   hspw_lab --config run.json --out report.json --csv rows.csv
//
// Every subcommand flag is the dashed form of an options key; values are read
// as JSON when they parse, as number lists when comma separated, and as
// strings otherwise.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "hspw/error.hpp"
#include "hspw/report.hpp"

using hspw::lab::Json;

namespace {

// keys whose values are specs, never numbers
const std::set<std::string> kTextKeys{"field", "psi", "family", "quantity", "of", "path", "solve", "sobolev_convention"};
// shared keys handled by global flags
const std::set<std::string> kGlobalKeys{"quadrature", "strict", "seed", "sobolev_convention"};

std::string dashed(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return key;
}

std::optional<Json> number_list(const std::string& s) {
  if (s.find(',') == std::string::npos) return std::nullopt;
  Json a = Json::array();
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(part, &used);
      if (used != part.size()) return std::nullopt;
      a.push_back(v);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return a;
}

Json flag_value(const std::string& key, const std::string& s) {
  if (kTextKeys.count(key)) return s;
  if (auto j = Json::parse(s, nullptr, false); !j.is_discarded()) return j;
  if (auto l = number_list(s)) return *l;
  return s;
}

// "lo:hi:count", evenly spaced and inclusive
Json p_range(const std::string& s) {
  double lo = 0, hi = 0;
  int count = 0;
  char c1 = 0, c2 = 0;
  std::istringstream is(s);
  if (!(is >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || count < 1 || hi < lo || !is.eof())
    throw hspw::lab::UsageError("/p", "--p-range expects lo:hi:count, got '" + s + "'");
  Json a = Json::array();
  for (int i = 0; i < count; ++i) a.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  return a;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hspw::lab::UsageError("/config", "cannot open " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw hspw::lab::UsageError("/config", path + " is not a JSON object");
  return j;
}

void diagnose(const Json& report) {
  if (!report.contains("error")) return;
  const Json& e = report["error"];
  std::cerr << "hspw_lab: " << e["code"].get<std::string>();
  if (e.contains("path") && !e["path"].get<std::string>().empty()) std::cerr << " at " << e["path"].get<std::string>();
  std::string msg = e["message"].get<std::string>();
  const std::string code = e["code"].get<std::string>() + ": ";
  if (msg.rfind(code, 0) == 0) msg.erase(0, code.size());  // library messages carry their code already
  std::cerr << ": " << msg << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted Hardy and Sobolev inequality lab"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path, out_path, csv_path, convention, quadrature;
  std::optional<int> seed;
  std::optional<double> rel_tol, abs_tol;
  std::optional<int> max_depth, base_order;
  bool strict = false;
  app.add_option("--config", config_path, "JSON file with the options (and optionally \"command\")");
  app.add_option("--out", out_path, "write the JSON report here instead of stdout");
  app.add_option("--csv", csv_path, "write the sweep table here");
  app.add_flag("--strict", strict, "unconverged quadrature is an error");
  app.add_option("--seed", seed, "seed for search restarts");
  app.add_option("--sobolev-convention", convention, "paper or standard");
  app.add_option("--quadrature", quadrature, "JSON object of quadrature overrides");
  app.add_option("--rel-tol", rel_tol);
  app.add_option("--abs-tol", abs_tol);
  app.add_option("--max-depth", max_depth);
  app.add_option("--base-order", base_order);

  std::map<std::string, std::map<std::string, std::string>> given;
  std::map<std::string, CLI::App*> subs;
  std::string p_range_spec;
  for (const auto& cmd : hspw::lab::commands()) {
    CLI::App* sub = app.add_subcommand(cmd);
    subs[cmd] = sub;
    sub->set_help_flag("--help", "print this help");  // -h would clash with the h exponent
    const Json defaults = hspw::lab::default_options(cmd);
    for (auto it = defaults.begin(); it != defaults.end(); ++it) {
      if (kGlobalKeys.count(it.key())) continue;
      sub->add_option("--" + dashed(it.key()), given[cmd][it.key()], "default " + it->dump());
    }
    if (cmd == "hspw-verify") sub->add_option("--p-range", p_range_spec, "lo:hi:count, replaces --p");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? hspw::lab::kExitOk : hspw::lab::kExitUsage;
  }

  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;

  hspw::lab::Outcome outcome;
  try {
    Json options = Json::object();
    if (!config_path.empty()) {
      options = read_json_file(config_path);
      if (options.contains("command")) {
        const Json c = options["command"];
        options.erase("command");
        if (!c.is_string()) throw hspw::lab::UsageError("/command", "expected a string");
        if (!command.empty() && command != c.get<std::string>())
          throw hspw::lab::UsageError("/command", "config says " + c.get<std::string>() + ", command line says " + command);
        command = c.get<std::string>();
      }
    }
    if (command.empty()) throw hspw::lab::UsageError("/command", "no command given (try --help)");
    if (!subs.count(command)) throw hspw::lab::UsageError("/command", "unknown command '" + command + "'");

    if (strict) options["strict"] = true;
    if (seed) options["seed"] = *seed;
    if (!convention.empty()) options["sobolev_convention"] = convention;
    if (!quadrature.empty()) {
      Json q = Json::parse(quadrature, nullptr, false);
      if (q.is_discarded() || !q.is_object()) throw hspw::lab::UsageError("/quadrature", "expected a JSON object");
      options["quadrature"].update(q);
    }
    if (rel_tol) options["quadrature"]["rel_tol"] = *rel_tol;
    if (abs_tol) options["quadrature"]["abs_tol"] = *abs_tol;
    if (max_depth) options["quadrature"]["max_depth"] = *max_depth;
    if (base_order) options["quadrature"]["base_order"] = *base_order;
    for (const auto& [key, text] : given[command]) {
      if (subs[command]->count("--" + dashed(key))) options[key] = flag_value(key, text);
    }
    if (!p_range_spec.empty()) options["p"] = p_range(p_range_spec);
    outcome = hspw::lab::run(command, options);
  } catch (const hspw::lab::UsageError& e) {
    outcome.report = {{"schema", hspw::lab::kSchema},
                      {"command", command},
                      {"config", Json::object()},
                      {"status", "error"},
                      {"error", {{"code", "UsageError"}, {"path", e.path()}, {"message", e.what()}}},
                      {"exit_code", hspw::lab::kExitUsage}};
    outcome.exit_code = hspw::lab::kExitUsage;
  }

  diagnose(outcome.report);
  const std::string text = outcome.report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!(out << text)) {
      std::cerr << "hspw_lab: IoError: cannot write " << out_path << "\n";
      return hspw::lab::kExitUsage;
    }
  }
  if (!csv_path.empty() && !outcome.report.contains("error")) {
    try {
      hspw::lab::emit_sweep_table(outcome.table, csv_path);
    } catch (const hspw::Error& e) {
      std::cerr << "hspw_lab: " << e.what() << "\n";
      return hspw::lab::kExitUsage;
    }
  }
  return outcome.exit_code;
}
