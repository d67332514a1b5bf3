#pragma once

// JSON and CSV views of the library results, and the command runners behind
// the hspw_lab tool. Every command takes one JSON options object (defaults
// filled in and echoed into the report) and never throws: failures become an
// "error" member plus an exit code.

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hspw/dilation.hpp"
#include "hspw/domain.hpp"
#include "hspw/field.hpp"
#include "hspw/grand_lebesgue.hpp"
#include "hspw/hspw_verifier.hpp"
#include "hspw/quadrature.hpp"

namespace hspw::lab {

using Json = nlohmann::json;

inline constexpr const char* kSchema = "hspw-lab/1";

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitCheckFailed = 2;
inline constexpr int kExitDivergent = 3;

/// Bad option value; `path` is a JSON pointer into the options object.
class UsageError : public std::runtime_error {
 public:
  UsageError(std::string path, const std::string& what) : std::runtime_error(what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// {"type": "interval", "lo", "hi"} | {"type": "box", "lo": [..], "hi": [..]}
/// | {"type": "ball", "center": [..], "radius"} | {"type": "polytope",
/// "faces": [{"normal": [..], "offset"}]} | {"type": "halfspace_product",
/// "d", "r", "truncation": {"lo": [..], "hi": [..]}}
Domain domain_from_json(const Json& j, const std::string& path = "/domain");

/// Overrides on top of the defaults; unknown keys are usage errors.
QuadratureConfig quadrature_from_json(const Json& j, const std::string& path = "/quadrature");
Json to_json(const QuadratureConfig& cfg);

Json to_json(const NormValue& v);
Json to_json(const HspwReport& r);
Json to_json(const GlsResult& r);
Json to_json(const Theorem21Report& r);
Json to_json(const SharpnessResult& r);
Json to_json(const DilationReport& r);
Json to_json(const NecessityReport& r);
Json to_json(const ExponentSolution& s);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// 17 significant digits; inf and nan spelled out.
std::string format_number(double v);

std::string render_csv(const Table& t);

/// Header plus one line per row. Refuses empty tables (InvalidConfig) and
/// reports unwritable paths (IoError).
void emit_sweep_table(const Table& t, const std::string& path);

struct Outcome {
  Json report;
  Table table;
  int exit_code = kExitOk;
};

/// norm, gls-norm, hspw-verify, sharpness, dilation, exponents, report.
const std::vector<std::string>& commands();

/// Defaults for `command`, including the shared keys (quadrature, strict,
/// seed, sobolev_convention).
Json default_options(const std::string& command);

/// Runs `command` with `options` laid over its defaults.
Outcome run(const std::string& command, const Json& options);

}  // namespace hspw::lab
