#pragma once

// Arithmetic expressions in the coordinates, for fields given on the command
// line ("poly:t*(1-t)", "expr:sin(x)*y^2"). Gradients come from forward-mode
// dual numbers, so parsed fields never fall back to finite differences.
//
// Variables: t and x (first coordinate), y, z, or x1 ... x8. Operators
// + - * / ^ (also **), unary minus, functions sin cos tan exp log sqrt abs
// tanh, two-argument min and max, the constant pi.

#include <string>
#include <string_view>
#include <vector>

#include "hspw/types.hpp"

namespace hspw {

class Expression {
 public:
  /// Throws ParseError with the offending position.
  static Expression parse(std::string_view text);

  /// 1 + the largest coordinate index referenced (0 for constants).
  int arity() const { return arity_; }
  const std::string& text() const { return text_; }

  double operator()(const Point& x) const;
  double value_and_gradient(const Point& x, Point& grad) const;

  enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Tanh, Min, Max };

  struct Node {
    Op op;
    double constant = 0.0;
    int var = 0;
    int lhs = -1;
    int rhs = -1;
  };

 private:
  template <class T>
  T eval(int node, const Point& x) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  int arity_ = 0;
  std::string text_;

  friend class ExpressionParser;
};

}  // namespace hspw
