#include "hspw/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <type_traits>

#include "hspw/error.hpp"

namespace hspw {

namespace {

struct Dual {
  double v;
  Point g;
};

template <class T>
T lift(double c, const Point& x) {
  if constexpr (std::is_same_v<T, double>)
    return c;
  else
    return Dual{c, Point::Zero(x.size())};
}

double variable(int i, const Point& x) { return x(i); }
Dual variable_dual(int i, const Point& x) {
  Dual d{x(i), Point::Zero(x.size())};
  d.g(i) = 1.0;
  return d;
}

double add(double a, double b) { return a + b; }
double sub(double a, double b) { return a - b; }
double mul(double a, double b) { return a * b; }
double div(double a, double b) { return a / b; }
double neg(double a) { return -a; }
double pow_(double a, double b) { return std::pow(a, b); }

Dual add(const Dual& a, const Dual& b) { return {a.v + b.v, a.g + b.g}; }
Dual sub(const Dual& a, const Dual& b) { return {a.v - b.v, a.g - b.g}; }
Dual mul(const Dual& a, const Dual& b) { return {a.v * b.v, a.g * b.v + b.g * a.v}; }
Dual div(const Dual& a, const Dual& b) { return {a.v / b.v, (a.g * b.v - b.g * a.v) / (b.v * b.v)}; }
Dual neg(const Dual& a) { return {-a.v, -a.g}; }
Dual pow_(const Dual& a, const Dual& b) {
  const double v = std::pow(a.v, b.v);
  Point g = Point::Zero(a.g.size());
  if (b.v != 0.0) g += b.v * std::pow(a.v, b.v - 1.0) * a.g;
  if (!b.g.isZero()) g += std::log(a.v) * v * b.g;
  return {v, g};
}

// f and f' for the one-argument functions
template <class F, class DF>
double apply1(double a, F f, DF) {
  return f(a);
}
template <class F, class DF>
Dual apply1(const Dual& a, F f, DF df) {
  return {f(a.v), df(a.v) * a.g};
}

double min_(double a, double b) { return std::min(a, b); }
double max_(double a, double b) { return std::max(a, b); }
Dual min_(const Dual& a, const Dual& b) { return a.v <= b.v ? a : b; }
Dual max_(const Dual& a, const Dual& b) { return a.v >= b.v ? a : b; }

}  // namespace

class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  Expression run() {
    Expression e;
    out_ = &e;
    e.text_ = std::string(text_);
    e.root_ = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << what << " at position " << pos_ << " in '" << text_ << "'";
    throw Error(ErrorCode::ParseError, os.str());
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(std::string_view tok) {
    skip();
    if (text_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  int push(Expression::Node n) {
    out_->nodes_.push_back(n);
    return static_cast<int>(out_->nodes_.size()) - 1;
  }

  int binary(Op op, int a, int b) { return push({op, 0.0, 0, a, b}); }

  int expr() {
    int lhs = term();
    for (;;) {
      if (eat("+"))
        lhs = binary(Op::Add, lhs, term());
      else if (eat("-"))
        lhs = binary(Op::Sub, lhs, term());
      else
        return lhs;
    }
  }

  int term() {
    int lhs = unary();
    for (;;) {
      skip();
      if (eat("*"))
        lhs = binary(Op::Mul, lhs, unary());
      else if (eat("/"))
        lhs = binary(Op::Div, lhs, unary());
      else
        return lhs;
    }
  }

  int unary() {
    if (eat("-")) return push({Op::Neg, 0.0, 0, unary(), -1});
    if (eat("+")) return unary();
    return power();
  }

  // right associative; binds tighter than unary minus on its left
  int power() {
    const int base = primary();
    if (eat("^") || eat("**")) return binary(Op::Pow, base, unary());
    return base;
  }

  int primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = expr();
      if (!eat(")")) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return name();
    fail(std::string("unexpected character '") + c + "'");
  }

  int number() {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (ec != std::errc{}) fail("malformed number");
    pos_ = static_cast<std::size_t>(end - text_.data());
    return push({Op::Const, v, 0, -1, -1});
  }

  int name() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    const std::string id(text_.substr(start, pos_ - start));

    static const std::pair<const char*, Op> unary_fns[] = {
        {"sin", Op::Sin},   {"cos", Op::Cos}, {"tan", Op::Tan}, {"exp", Op::Exp},
        {"log", Op::Log},   {"sqrt", Op::Sqrt}, {"abs", Op::Abs}, {"tanh", Op::Tanh},
    };
    for (const auto& [fn, op] : unary_fns) {
      if (id == fn) {
        if (!eat("(")) fail("expected '(' after " + id);
        const int arg = expr();
        if (!eat(")")) fail("expected ')'");
        return push({op, 0.0, 0, arg, -1});
      }
    }
    if (id == "min" || id == "max") {
      if (!eat("(")) fail("expected '(' after " + id);
      const int a = expr();
      if (!eat(",")) fail("expected ','");
      const int b = expr();
      if (!eat(")")) fail("expected ')'");
      return binary(id == "min" ? Op::Min : Op::Max, a, b);
    }
    if (id == "pi") return push({Op::Const, std::numbers::pi, 0, -1, -1});

    int var = -1;
    if (id == "t" || id == "x") var = 0;
    else if (id == "y") var = 1;
    else if (id == "z") var = 2;
    else if (id.size() == 2 && id[0] == 'x' && id[1] >= '1' && id[1] <= '8') var = id[1] - '1';
    if (var < 0) {
      pos_ = start;
      fail("unknown identifier '" + id + "'");
    }
    out_->arity_ = std::max(out_->arity_, var + 1);
    return push({Op::Var, 0.0, var, -1, -1});
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Expression* out_ = nullptr;
};

Expression Expression::parse(std::string_view text) { return ExpressionParser(text).run(); }

template <class T>
T Expression::eval(int index, const Point& x) const {
  const Node& n = nodes_[static_cast<std::size_t>(index)];
  switch (n.op) {
    case Op::Const: return lift<T>(n.constant, x);
    case Op::Var:
      if constexpr (std::is_same_v<T, double>)
        return variable(n.var, x);
      else
        return variable_dual(n.var, x);
    case Op::Add: return add(eval<T>(n.lhs, x), eval<T>(n.rhs, x));
    case Op::Sub: return sub(eval<T>(n.lhs, x), eval<T>(n.rhs, x));
    case Op::Mul: return mul(eval<T>(n.lhs, x), eval<T>(n.rhs, x));
    case Op::Div: return div(eval<T>(n.lhs, x), eval<T>(n.rhs, x));
    case Op::Pow: return pow_(eval<T>(n.lhs, x), eval<T>(n.rhs, x));
    case Op::Neg: return neg(eval<T>(n.lhs, x));
    case Op::Min: return min_(eval<T>(n.lhs, x), eval<T>(n.rhs, x));
    case Op::Max: return max_(eval<T>(n.lhs, x), eval<T>(n.rhs, x));
    case Op::Sin:
      return apply1(eval<T>(n.lhs, x), [](double a) { return std::sin(a); }, [](double a) { return std::cos(a); });
    case Op::Cos:
      return apply1(eval<T>(n.lhs, x), [](double a) { return std::cos(a); }, [](double a) { return -std::sin(a); });
    case Op::Tan:
      return apply1(
          eval<T>(n.lhs, x), [](double a) { return std::tan(a); },
          [](double a) { return 1.0 / (std::cos(a) * std::cos(a)); });
    case Op::Exp:
      return apply1(eval<T>(n.lhs, x), [](double a) { return std::exp(a); }, [](double a) { return std::exp(a); });
    case Op::Log:
      return apply1(eval<T>(n.lhs, x), [](double a) { return std::log(a); }, [](double a) { return 1.0 / a; });
    case Op::Sqrt:
      return apply1(
          eval<T>(n.lhs, x), [](double a) { return std::sqrt(a); }, [](double a) { return 0.5 / std::sqrt(a); });
    case Op::Abs:
      return apply1(
          eval<T>(n.lhs, x), [](double a) { return std::abs(a); },
          [](double a) { return a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0); });
    case Op::Tanh:
      return apply1(
          eval<T>(n.lhs, x), [](double a) { return std::tanh(a); },
          [](double a) { return 1.0 - std::tanh(a) * std::tanh(a); });
  }
  return lift<T>(0.0, x);
}

double Expression::operator()(const Point& x) const { return eval<double>(root_, x); }

double Expression::value_and_gradient(const Point& x, Point& grad) const {
  const Dual d = eval<Dual>(root_, x);
  grad = d.g;
  return d.v;
}

}  // namespace hspw
