#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hspw {

enum class ErrorCode {
  PointOutsideDomain,
  DegenerateDomain,
  DimensionMismatch,
  DimensionUnsupported,
  InvalidAlpha,
  InvalidP,
  InvalidConfig,
  UnboundedIntegrand,
  NoConvergence,
  SupportEscapesDomain,
  EmptyGrid,
  GlsDivergent,
  InvalidGeneratingFunction,
  OutOfRange,
  InfeasibleFamily,
  NonpositiveLambda,
  NoSolution,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// All library failures carry a machine-readable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hspw
