#pragma once

// Built-in fields, addressable by name:
//
//   zero                 u = 0
//   bump                 smooth, compactly supported around the domain's interior point
//   poly:<expr>          expression in the coordinates (see expression.hpp)
//   expr:<expr>          same as poly:
//   power:<beta>         u = d^beta
//   distance             u = d
//   profile:<beta>,<M>   u = phi(d), phi(s) = s^beta on (0, 1], linear down to 0 at s = M
//
// All of them carry analytic gradients.

#include <string_view>

#include "hspw/domain.hpp"
#include "hspw/expression.hpp"
#include "hspw/field.hpp"

namespace hspw {

ScalarField expression_field(const Expression& expr, int dim);

ScalarField bump_field(const Domain& dom);

/// u = d^beta.
ScalarField distance_power_field(const Domain& dom, double beta);

/// u = phi(d) with phi(s) = s^beta for s <= 1 and (M - s) / (M - 1) on [1, M].
ScalarField power_profile_field(const Domain& dom, double beta, double cutoff);

/// Throws ParseError for unknown names, DimensionMismatch when an expression
/// uses more coordinates than the domain has.
ScalarField parse_field(std::string_view spec, const Domain& dom);

}  // namespace hspw
