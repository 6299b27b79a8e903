#pragma once

// Closed-form expression ASTs over base/fibre coordinates x1..xn, y1..yn and
// named parameters, with a recursive-descent parser, a minimal-parentheses
// printer, and evaluation templated over the scalar type.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sprayholo {

enum class BinOp { Add, Sub, Mul, Div, Pow };
enum class Func { Sqrt, Sin, Cos, Exp, Log, Abs };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Number, Coord, Param, Neg, Bin, Call };
  Kind kind;
  double number = 0.0;    // Number
  char axis = 0;          // Coord: 'x' or 'y'
  int index = 0;          // Coord: 1-based
  std::string name;       // Param
  BinOp op = BinOp::Add;  // Bin
  Func func = Func::Sqrt; // Call
  ExprPtr lhs, rhs;       // Bin has both, Neg/Call use lhs

  static ExprPtr make_number(double v) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Number;
    e->number = v;
    return e;
  }
  static ExprPtr make_coord(char axis, int index) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Coord;
    e->axis = axis;
    e->index = index;
    return e;
  }
  static ExprPtr make_param(std::string name) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Param;
    e->name = std::move(name);
    return e;
  }
  static ExprPtr make_neg(ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Neg;
    e->lhs = std::move(a);
    return e;
  }
  static ExprPtr make_bin(BinOp op, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Bin;
    e->op = op;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
  }
  static ExprPtr make_call(Func f, ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Call;
    e->func = f;
    e->lhs = std::move(a);
    return e;
  }
};

struct ParseError : std::runtime_error {
  std::size_t position; // 1-based character position in the input
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " at position " + std::to_string(pos)),
        position(pos) {}
};

struct EvalError : std::runtime_error {
  explicit EvalError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

inline const char* func_name(Func f) {
  switch (f) {
    case Func::Sqrt: return "sqrt";
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Abs: return "abs";
  }
  return "?";
}

struct Lexer {
  std::string_view src;
  std::size_t pos = 0; // 0-based offset

  void skip_ws() {
    while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t' ||
                                src[pos] == '\n' || src[pos] == '\r'))
      ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= src.size();
  }
  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }
  // 1-based position of the next token, for error reporting
  std::size_t here() {
    skip_ws();
    return pos + 1;
  }
};

class Parser {
 public:
  explicit Parser(std::string_view src, int n = 0,
                  const std::set<std::string>* params = nullptr)
      : lx_{src}, n_(n), params_(params) {}

  ExprPtr parse() {
    if (lx_.eof()) throw ParseError("empty expression", 1);
    ExprPtr e = parse_sum();
    if (!lx_.eof())
      throw ParseError(std::string("unexpected character '") + lx_.peek() + "'",
                       lx_.here());
    return e;
  }

 private:
  Lexer lx_;
  int n_ = 0;                                   // 0 means unchecked
  const std::set<std::string>* params_ = nullptr;

  ExprPtr parse_sum() {
    ExprPtr e = parse_term();
    for (;;) {
      char c = lx_.peek();
      if (c == '+' || c == '-') {
        ++lx_.pos;
        ExprPtr r = parse_term();
        e = Expr::make_bin(c == '+' ? BinOp::Add : BinOp::Sub, e, r);
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_unary();
    for (;;) {
      char c = lx_.peek();
      if (c == '*' || c == '/') {
        ++lx_.pos;
        ExprPtr r = parse_unary();
        e = Expr::make_bin(c == '*' ? BinOp::Mul : BinOp::Div, e, r);
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_unary() {
    if (lx_.peek() == '-') {
      ++lx_.pos;
      ExprPtr a = parse_unary();
      // fold a negated literal into the literal so printing round-trips
      if (a->kind == Expr::Kind::Number) return Expr::make_number(-a->number);
      return Expr::make_neg(a);
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    if (lx_.peek() == '^') {
      ++lx_.pos;
      ExprPtr exp = parse_unary(); // right-associative, allows y^-2
      return Expr::make_bin(BinOp::Pow, base, exp);
    }
    return base;
  }

  ExprPtr parse_atom() {
    char c = lx_.peek();
    std::size_t at = lx_.here();
    if (c == '(') {
      ++lx_.pos;
      ExprPtr e = parse_sum();
      if (lx_.peek() != ')')
        throw ParseError("expected ')'", lx_.here());
      ++lx_.pos;
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return parse_number(at);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_ident(at);
    if (c == '\0') throw ParseError("unexpected end of input", at);
    throw ParseError(std::string("unexpected character '") + c + "'", at);
  }

  ExprPtr parse_number(std::size_t at) {
    std::size_t start = lx_.pos;
    std::size_t p = start;
    const std::string_view s = lx_.src;
    while (p < s.size() && std::isdigit(static_cast<unsigned char>(s[p]))) ++p;
    if (p < s.size() && s[p] == '.') {
      ++p;
      while (p < s.size() && std::isdigit(static_cast<unsigned char>(s[p]))) ++p;
    }
    if (p < s.size() && (s[p] == 'e' || s[p] == 'E')) {
      std::size_t q = p + 1;
      if (q < s.size() && (s[q] == '+' || s[q] == '-')) ++q;
      if (q < s.size() && std::isdigit(static_cast<unsigned char>(s[q]))) {
        ++q;
        while (q < s.size() && std::isdigit(static_cast<unsigned char>(s[q]))) ++q;
        p = q;
      }
    }
    double v = 0.0;
    auto res = std::from_chars(s.data() + start, s.data() + p, v);
    if (res.ec != std::errc{} || res.ptr != s.data() + p)
      throw ParseError("malformed number", at);
    lx_.pos = p;
    return Expr::make_number(v);
  }

  ExprPtr parse_ident(std::size_t at) {
    std::size_t start = lx_.pos;
    std::size_t p = start;
    const std::string_view s = lx_.src;
    while (p < s.size() && (std::isalnum(static_cast<unsigned char>(s[p])) ||
                            s[p] == '_'))
      ++p;
    std::string word(s.substr(start, p - start));
    lx_.pos = p;

    // coordinate: x or y followed only by digits, index >= 1
    if ((word[0] == 'x' || word[0] == 'y') && word.size() > 1) {
      bool digits = true;
      for (std::size_t i = 1; i < word.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(word[i]))) digits = false;
      if (digits) {
        if (word.size() > 7) throw ParseError("coordinate index too large", at);
        int idx = std::stoi(word.substr(1));
        if (idx < 1)
          throw ParseError("coordinate index must be >= 1", at);
        if (n_ > 0 && idx > n_)
          throw ParseError("coordinate index " + word.substr(1) +
                               " out of 1.." + std::to_string(n_),
                           at);
        return Expr::make_coord(word[0], idx);
      }
    }

    static const std::map<std::string, Func, std::less<>> funcs = {
        {"sqrt", Func::Sqrt}, {"sin", Func::Sin}, {"cos", Func::Cos},
        {"exp", Func::Exp},   {"log", Func::Log}, {"abs", Func::Abs}};
    auto it = funcs.find(word);
    if (lx_.peek() == '(') {
      if (it == funcs.end())
        throw ParseError("unknown function '" + word + "'", at);
      ++lx_.pos;
      ExprPtr arg = parse_sum();
      if (lx_.peek() != ')')
        throw ParseError("expected ')'", lx_.here());
      ++lx_.pos;
      return Expr::make_call(it->second, arg);
    }
    if (it != funcs.end())
      throw ParseError("expected '(' after function name '" + word + "'", at);
    if (params_ && !params_->count(word))
      throw ParseError("unknown identifier '" + word + "'", at);
    return Expr::make_param(word);
  }
};

inline int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Bin:
      switch (e.op) {
        case BinOp::Add:
        case BinOp::Sub: return 1;
        case BinOp::Mul:
        case BinOp::Div: return 2;
        case BinOp::Pow: return 4;
      }
      return 1;
    case Expr::Kind::Neg: return 3;
    case Expr::Kind::Number:
      // a negative literal prints with a leading '-', binding like negation
      return e.number < 0 ? 3 : 5;
    default: return 5;
  }
}

inline void print_rec(const Expr& e, std::string& out);

inline void print_child(const ExprPtr& c, int min_prec, std::string& out) {
  if (precedence(*c) < min_prec) {
    out += '(';
    print_rec(*c, out);
    out += ')';
  } else {
    print_rec(*c, out);
  }
}

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void print_rec(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::Number: {
      out += format_double(e.number);
      return;
    }
    case Expr::Kind::Coord:
      out += e.axis;
      out += std::to_string(e.index);
      return;
    case Expr::Kind::Param:
      out += e.name;
      return;
    case Expr::Kind::Neg:
      out += '-';
      print_child(e.lhs, 3, out);
      return;
    case Expr::Kind::Call:
      out += func_name(e.func);
      out += '(';
      print_rec(*e.lhs, out);
      out += ')';
      return;
    case Expr::Kind::Bin: {
      int p = precedence(e);
      const char* sym = "";
      switch (e.op) {
        case BinOp::Add: sym = "+"; break;
        case BinOp::Sub: sym = "-"; break;
        case BinOp::Mul: sym = "*"; break;
        case BinOp::Div: sym = "/"; break;
        case BinOp::Pow: sym = "^"; break;
      }
      if (e.op == BinOp::Pow) {
        // right-associative: parenthesize an lhs that is itself a power
        print_child(e.lhs, p + 1, out);
        out += sym;
        print_child(e.rhs, p, out);
      } else {
        print_child(e.lhs, p, out);
        out += sym;
        // left-associative: equal precedence on the right needs parens
        print_child(e.rhs, p + 1, out);
      }
      return;
    }
  }
}

} // namespace detail

inline ExprPtr parse_expression(std::string_view src) {
  return detail::Parser(src).parse();
}

// validating variant: coordinate indices must lie in 1..n and identifiers
// must be declared parameters
inline ExprPtr parse_expression(std::string_view src, int n,
                                const std::set<std::string>& params) {
  return detail::Parser(src, n, &params).parse();
}

inline std::string print_expression(const ExprPtr& e) {
  std::string out;
  detail::print_rec(*e, out);
  return out;
}

inline bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::Number: return a->number == b->number;
    case Expr::Kind::Coord: return a->axis == b->axis && a->index == b->index;
    case Expr::Kind::Param: return a->name == b->name;
    case Expr::Kind::Neg: return structurally_equal(a->lhs, b->lhs);
    case Expr::Kind::Call:
      return a->func == b->func && structurally_equal(a->lhs, b->lhs);
    case Expr::Kind::Bin:
      return a->op == b->op && structurally_equal(a->lhs, b->lhs) &&
             structurally_equal(a->rhs, b->rhs);
  }
  return false;
}

// Which coordinates and parameters an expression mentions.
struct VarScan {
  int max_x = 0;
  int max_y = 0;
  std::set<std::string> params;
};

inline void scan_variables(const ExprPtr& e, VarScan& out) {
  switch (e->kind) {
    case Expr::Kind::Coord:
      (e->axis == 'x' ? out.max_x : out.max_y) =
          std::max(e->axis == 'x' ? out.max_x : out.max_y, e->index);
      return;
    case Expr::Kind::Param:
      out.params.insert(e->name);
      return;
    case Expr::Kind::Neg:
      scan_variables(e->lhs, out);
      return;
    case Expr::Kind::Call:
      scan_variables(e->lhs, out);
      return;
    case Expr::Kind::Bin:
      scan_variables(e->lhs, out);
      scan_variables(e->rhs, out);
      return;
    default:
      return;
  }
}

inline VarScan scan_variables(const ExprPtr& e) {
  VarScan s;
  scan_variables(e, s);
  return s;
}

// Evaluation. The scalar type T must provide the arithmetic operators and the
// functions sh_sqrt/sh_sin/sh_cos/sh_exp/sh_log/sh_abs/scalar_part found via
// ADL. Plain double satisfies this through the overloads below, and the
// depth-0 jet agrees with it bitwise because every jet recursion bottoms out
// in the identical scalar formula.

inline double scalar_part(double v) { return v; }
inline double sh_sqrt(double v) { return std::sqrt(v); }
inline double sh_sin(double v) { return std::sin(v); }
inline double sh_cos(double v) { return std::cos(v); }
inline double sh_exp(double v) { return std::exp(v); }
inline double sh_log(double v) { return std::log(v); }
inline double sh_abs(double v) { return v < 0 ? -v : v; }
inline bool differentiating(double) { return false; }

template <class T>
struct EvalContext {
  int n = 0;                     // base dimension
  std::span<const T> coords;     // x1..xn then y1..yn
  const std::map<std::string, double>* params = nullptr;
  const std::map<std::string, T>* bound = nullptr; // per-call scalar bindings

  // a constant of the same shape as the coordinate scalars; for plain
  // doubles this is just v (0*c0 + v == v exactly for finite c0)
  T constant(double v) const { return coords[0] * 0.0 + v; }
};

namespace detail {

// exponentiation by squaring, shared by every scalar type
template <class T>
T pow_nonneg_int(const T& base, long long e) {
  if (e == 0) return base * 0.0 + 1.0;
  T acc = base;
  // highest set bit first
  int top = 63;
  while (top > 0 && !((e >> top) & 1)) --top;
  for (int b = top - 1; b >= 0; --b) {
    acc = acc * acc;
    if ((e >> b) & 1) acc = acc * base;
  }
  return acc;
}

template <class T>
T eval_rec(const Expr& e, const EvalContext<T>& ctx) {
  switch (e.kind) {
    case Expr::Kind::Number:
      return ctx.constant(e.number);
    case Expr::Kind::Coord: {
      int slot = (e.axis == 'x') ? e.index - 1 : ctx.n + e.index - 1;
      if (e.index < 1 || e.index > ctx.n)
        throw EvalError(std::string("coordinate ") + e.axis +
                        std::to_string(e.index) + " exceeds dimension " +
                        std::to_string(ctx.n));
      return ctx.coords[static_cast<std::size_t>(slot)];
    }
    case Expr::Kind::Param: {
      if (ctx.bound) {
        auto it = ctx.bound->find(e.name);
        if (it != ctx.bound->end()) return it->second;
      }
      if (!ctx.params || !ctx.params->count(e.name))
        throw EvalError("unbound parameter '" + e.name + "'");
      return ctx.constant(ctx.params->at(e.name));
    }
    case Expr::Kind::Neg:
      return -eval_rec(*e.lhs, ctx);
    case Expr::Kind::Call: {
      T a = eval_rec(*e.lhs, ctx);
      double s = scalar_part(a);
      switch (e.func) {
        case Func::Sqrt:
          if (s < 0) throw EvalError("sqrt of negative value");
          if (s == 0 && differentiating(a))
            throw EvalError("sqrt not differentiable at 0");
          return sh_sqrt(a);
        case Func::Sin: return sh_sin(a);
        case Func::Cos: return sh_cos(a);
        case Func::Exp: return sh_exp(a);
        case Func::Log:
          if (s <= 0) throw EvalError("log of non-positive value");
          return sh_log(a);
        case Func::Abs:
          if (s == 0 && differentiating(a))
            throw EvalError("abs not differentiable at 0");
          return sh_abs(a);
      }
      throw EvalError("unknown function");
    }
    case Expr::Kind::Bin: {
      if (e.op == BinOp::Pow) {
        T base = eval_rec(*e.lhs, ctx);
        // literal integer exponent: repeated multiplication, any base
        if (e.rhs->kind == Expr::Kind::Number) {
          double ev = e.rhs->number;
          if (ev == static_cast<long long>(ev) && std::abs(ev) <= 1e9) {
            long long k = static_cast<long long>(ev);
            if (k >= 0) return pow_nonneg_int(base, k);
            if (scalar_part(base) == 0)
              throw EvalError("zero raised to a negative power");
            T one = base * 0.0 + 1.0;
            return one / pow_nonneg_int(base, -k);
          }
        }
        // general exponent: base must be positive
        if (scalar_part(base) <= 0)
          throw EvalError("power with non-positive base requires an integer "
                          "exponent");
        T expo = eval_rec(*e.rhs, ctx);
        return sh_exp(expo * sh_log(base));
      }
      T a = eval_rec(*e.lhs, ctx);
      T b = eval_rec(*e.rhs, ctx);
      switch (e.op) {
        case BinOp::Add: return a + b;
        case BinOp::Sub: return a - b;
        case BinOp::Mul: return a * b;
        case BinOp::Div:
          if (scalar_part(b) == 0) throw EvalError("division by zero");
          return a / b;
        default: break;
      }
      throw EvalError("unknown operator");
    }
  }
  throw EvalError("malformed expression node");
}

} // namespace detail

template <class T>
T evaluate(const ExprPtr& e, const EvalContext<T>& ctx) {
  return detail::eval_rec(*e, ctx);
}

// convenience for plain points
inline double evaluate_at(const ExprPtr& e, int n, std::span<const double> coords,
                          const std::map<std::string, double>& params) {
  EvalContext<double> ctx;
  ctx.n = n;
  ctx.coords = coords;
  ctx.params = &params;
  return evaluate(e, ctx);
}

} // namespace sprayholo
