#pragma once

// Expression language for the user-supplied functions f, g and m.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | atom ('^' factor)?
//   atom   := NUMBER | 't' | IDENT '(' expr (',' expr)? ')' | '(' expr ')'
//
// IDENT is one of sqrt, exp, ln, abs (one argument) or pow (two arguments).
// Expressions are immutable after construction and can be shared and
// evaluated from any number of threads.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "choquet/error.hpp"

namespace choquet {

class Expr {
 public:
  enum class Kind {
    Number,
    Variable,
    Add,
    Sub,
    Mul,
    Div,
    Power,  // a ^ b
    Negate,
    Sqrt,
    Exp,
    Ln,
    Abs,
    Pow,  // pow(a, b), base must be nonnegative
  };

  Expr() : Expr(number(0.0)) {}

  static Expr number(double value) { return Expr(std::make_shared<const Node>(Kind::Number, value)); }
  static Expr variable() { return Expr(std::make_shared<const Node>(Kind::Variable, 0.0)); }

  /// Unary node (Negate, Sqrt, Exp, Ln, Abs); folds constant arguments.
  static Expr unary(Kind kind, const Expr& arg) {
    Expr e(std::make_shared<const Node>(kind, 0.0, arg.node_));
    return e.folded();
  }

  /// Binary node (Add, Sub, Mul, Div, Power, Pow); folds constant arguments.
  static Expr binary(Kind kind, const Expr& lhs, const Expr& rhs) {
    Expr e(std::make_shared<const Node>(kind, 0.0, lhs.node_, rhs.node_));
    return e.folded();
  }

  Kind kind() const noexcept { return node_->kind; }
  bool depends_on_t() const noexcept { return node_->has_variable; }

  std::optional<double> constant_value() const {
    if (node_->kind == Kind::Number) return node_->value;
    return std::nullopt;
  }

  /// Evaluates at `t`. Throws DomainError instead of returning a non-finite value.
  double operator()(double t) const { return eval_node(*node_, t); }
  double eval(double t) const { return eval_node(*node_, t); }

  /// Symbolic derivative with respect to t. Throws NonDifferentiable for abs.
  Expr derivative() const { return derive_node(node_); }

  /// Replaces every occurrence of t by `replacement`.
  Expr substitute(const Expr& replacement) const { return Expr(substitute_node(node_, replacement.node_)).folded(); }

  /// Fully parenthesised source text; parses back to an equivalent expression.
  std::string str() const {
    std::string out;
    render_node(*node_, out);
    return out;
  }

  friend Expr operator+(const Expr& a, const Expr& b) { return binary(Kind::Add, a, b); }
  friend Expr operator-(const Expr& a, const Expr& b) { return binary(Kind::Sub, a, b); }
  friend Expr operator*(const Expr& a, const Expr& b) { return binary(Kind::Mul, a, b); }
  friend Expr operator/(const Expr& a, const Expr& b) { return binary(Kind::Div, a, b); }
  friend Expr operator-(const Expr& a) { return unary(Kind::Negate, a); }

 private:
  struct Node {
    Node(Kind k, double v, std::shared_ptr<const Node> l = nullptr, std::shared_ptr<const Node> r = nullptr)
        : kind(k), value(v), lhs(std::move(l)), rhs(std::move(r)) {
      has_variable = k == Kind::Variable || (lhs && lhs->has_variable) || (rhs && rhs->has_variable);
    }
    Kind kind;
    double value;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
    bool has_variable = false;
  };
  using NodePtr = std::shared_ptr<const Node>;

  explicit Expr(NodePtr node) : node_(std::move(node)) {}

  static bool is_number(const NodePtr& n) { return n->kind == Kind::Number; }
  static bool is_number(const NodePtr& n, double v) { return n->kind == Kind::Number && n->value == v; }

  // Collapses a node whose children are all numbers, unless evaluation fails.
  Expr folded() const {
    const Node& n = *node_;
    if (n.kind == Kind::Number || n.kind == Kind::Variable || n.has_variable) return *this;
    try {
      return number(eval_node(n, 0.0));
    } catch (const DomainError&) {
      return *this;
    }
  }

  [[noreturn]] static void domain_fail(const char* what, const Node& n, double t) {
    std::string text;
    render_node(n, text);
    throw DomainError(what, std::move(text), t);
  }

  static double checked(double v, const Node& n, double t) {
    if (!std::isfinite(v)) domain_fail("non-finite result", n, t);
    return v;
  }

  static double power(double base, double expo, const Node& n, double t, bool nonnegative_base) {
    if (base < 0.0) {
      if (nonnegative_base) domain_fail("pow of a negative base", n, t);
      if (expo != std::floor(expo)) domain_fail("negative base with non-integer exponent", n, t);
    }
    if (base == 0.0 && expo < 0.0) domain_fail("zero raised to a negative power", n, t);
    return checked(std::pow(base, expo), n, t);
  }

  static double eval_node(const Node& n, double t) {
    switch (n.kind) {
      case Kind::Number:
        return n.value;
      case Kind::Variable:
        return t;
      case Kind::Add:
        return checked(eval_node(*n.lhs, t) + eval_node(*n.rhs, t), n, t);
      case Kind::Sub:
        return checked(eval_node(*n.lhs, t) - eval_node(*n.rhs, t), n, t);
      case Kind::Mul:
        return checked(eval_node(*n.lhs, t) * eval_node(*n.rhs, t), n, t);
      case Kind::Div: {
        const double num = eval_node(*n.lhs, t);
        const double den = eval_node(*n.rhs, t);
        if (den == 0.0) domain_fail("division by zero", n, t);
        return checked(num / den, n, t);
      }
      case Kind::Power:
        return power(eval_node(*n.lhs, t), eval_node(*n.rhs, t), n, t, false);
      case Kind::Pow:
        return power(eval_node(*n.lhs, t), eval_node(*n.rhs, t), n, t, true);
      case Kind::Negate:
        return -eval_node(*n.lhs, t);
      case Kind::Sqrt: {
        const double x = eval_node(*n.lhs, t);
        if (x < 0.0) domain_fail("sqrt of a negative argument", n, t);
        return std::sqrt(x);
      }
      case Kind::Exp:
        return checked(std::exp(eval_node(*n.lhs, t)), n, t);
      case Kind::Ln: {
        const double x = eval_node(*n.lhs, t);
        if (x <= 0.0) domain_fail("ln of a non-positive argument", n, t);
        return std::log(x);
      }
      case Kind::Abs:
        return std::fabs(eval_node(*n.lhs, t));
    }
    domain_fail("unknown node", n, t);
  }

  static void render_number(double v, std::string& out) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (std::signbit(v)) {
      out += '(';
      out += buf;
      out += ')';
    } else {
      out += buf;
    }
  }

  static void render_node(const Node& n, std::string& out) {
    auto infix = [&](const char* op) {
      out += '(';
      render_node(*n.lhs, out);
      out += op;
      render_node(*n.rhs, out);
      out += ')';
    };
    auto call = [&](const char* name) {
      out += name;
      out += '(';
      render_node(*n.lhs, out);
      if (n.rhs) {
        out += ", ";
        render_node(*n.rhs, out);
      }
      out += ')';
    };
    switch (n.kind) {
      case Kind::Number: render_number(n.value, out); break;
      case Kind::Variable: out += 't'; break;
      case Kind::Add: infix(" + "); break;
      case Kind::Sub: infix(" - "); break;
      case Kind::Mul: infix(" * "); break;
      case Kind::Div: infix(" / "); break;
      case Kind::Power: infix(" ^ "); break;
      case Kind::Negate:
        out += "(-";
        render_node(*n.lhs, out);
        out += ')';
        break;
      case Kind::Sqrt: call("sqrt"); break;
      case Kind::Exp: call("exp"); break;
      case Kind::Ln: call("ln"); break;
      case Kind::Abs: call("abs"); break;
      case Kind::Pow: call("pow"); break;
    }
  }

  static NodePtr substitute_node(const NodePtr& n, const NodePtr& replacement) {
    if (n->kind == Kind::Variable) return replacement;
    if (!n->has_variable) return n;
    NodePtr l = n->lhs ? substitute_node(n->lhs, replacement) : nullptr;
    NodePtr r = n->rhs ? substitute_node(n->rhs, replacement) : nullptr;
    return std::make_shared<const Node>(n->kind, n->value, std::move(l), std::move(r));
  }

  // Builders used by differentiation: constant folding plus the trivial
  // identities with 0 and 1 so derivatives do not drag dead subtrees along.
  static Expr add(const Expr& a, const Expr& b) {
    if (is_number(a.node_, 0.0)) return b;
    if (is_number(b.node_, 0.0)) return a;
    return binary(Kind::Add, a, b);
  }
  static Expr sub(const Expr& a, const Expr& b) {
    if (is_number(b.node_, 0.0)) return a;
    if (is_number(a.node_, 0.0)) return unary(Kind::Negate, b);
    return binary(Kind::Sub, a, b);
  }
  static Expr mul(const Expr& a, const Expr& b) {
    if (is_number(a.node_, 0.0) || is_number(b.node_, 0.0)) return number(0.0);
    if (is_number(a.node_, 1.0)) return b;
    if (is_number(b.node_, 1.0)) return a;
    return binary(Kind::Mul, a, b);
  }
  static Expr div(const Expr& a, const Expr& b) {
    if (is_number(a.node_, 0.0)) return number(0.0);
    if (is_number(b.node_, 1.0)) return a;
    return binary(Kind::Div, a, b);
  }
  static Expr raise(Kind kind, const Expr& base, double expo) {
    if (expo == 0.0) return number(1.0);
    if (expo == 1.0) return base;
    return binary(kind, base, number(expo));
  }

  static Expr derive_node(const NodePtr& n) {
    const Expr self(n);
    if (!n->has_variable) return number(0.0);
    const Expr u = n->lhs ? Expr(n->lhs) : Expr();
    const Expr v = n->rhs ? Expr(n->rhs) : Expr();
    switch (n->kind) {
      case Kind::Number:
        return number(0.0);
      case Kind::Variable:
        return number(1.0);
      case Kind::Add:
        return add(u.derivative(), v.derivative());
      case Kind::Sub:
        return sub(u.derivative(), v.derivative());
      case Kind::Mul:
        return add(mul(u.derivative(), v), mul(u, v.derivative()));
      case Kind::Div:
        return sub(div(u.derivative(), v), div(mul(u, v.derivative()), mul(v, v)));
      case Kind::Negate:
        return unary(Kind::Negate, u.derivative());
      case Kind::Power:
      case Kind::Pow: {
        if (auto c = v.constant_value()) {
          return mul(mul(number(*c), raise(n->kind, u, *c - 1.0)), u.derivative());
        }
        // d(u^v) = u^v * (v' ln u + v u' / u)
        return mul(self, add(mul(v.derivative(), unary(Kind::Ln, u)), div(mul(v, u.derivative()), u)));
      }
      case Kind::Sqrt:
        return div(u.derivative(), mul(number(2.0), self));
      case Kind::Exp:
        return mul(self, u.derivative());
      case Kind::Ln:
        return div(u.derivative(), u);
      case Kind::Abs:
        throw NonDifferentiable("abs is not differentiable: '" + self.str() + "'");
    }
    throw NonDifferentiable("unknown node");
  }

  NodePtr node_;

  friend class ExprParser;
};

class ExprParser {
 public:
  static constexpr int kMaxDepth = 256;

  explicit ExprParser(std::string_view src) : src_(src) { advance(); }

  Expr parse() {
    Expr e = expression();
    if (tok_.type != Tok::End) fail("operator or end of input");
    return e;
  }

 private:
  enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End, Invalid };

  struct Token {
    Tok type = Tok::End;
    std::size_t offset = 0;
    std::string_view text;
    double number = 0.0;
  };

  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

  void advance() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
    tok_ = Token{};
    tok_.offset = pos_;
    if (pos_ >= src_.size()) {
      tok_.type = Tok::End;
      return;
    }
    const char c = src_[pos_];
    if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
      lex_number();
      return;
    }
    if (is_alpha(c)) {
      std::size_t end = pos_ + 1;
      while (end < src_.size() && (is_alpha(src_[end]) || is_digit(src_[end]))) ++end;
      tok_.type = Tok::Ident;
      tok_.text = src_.substr(pos_, end - pos_);
      pos_ = end;
      return;
    }
    tok_.text = src_.substr(pos_, 1);
    ++pos_;
    switch (c) {
      case '+': tok_.type = Tok::Plus; break;
      case '-': tok_.type = Tok::Minus; break;
      case '*': tok_.type = Tok::Star; break;
      case '/': tok_.type = Tok::Slash; break;
      case '^': tok_.type = Tok::Caret; break;
      case '(': tok_.type = Tok::LParen; break;
      case ')': tok_.type = Tok::RParen; break;
      case ',': tok_.type = Tok::Comma; break;
      default: tok_.type = Tok::Invalid; break;
    }
  }

  void lex_number() {
    std::size_t end = pos_;
    while (end < src_.size() && is_digit(src_[end])) ++end;
    if (end < src_.size() && src_[end] == '.') {
      ++end;
      while (end < src_.size() && is_digit(src_[end])) ++end;
    }
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t exp_end = end + 1;
      if (exp_end < src_.size() && (src_[exp_end] == '+' || src_[exp_end] == '-')) ++exp_end;
      if (exp_end < src_.size() && is_digit(src_[exp_end])) {
        while (exp_end < src_.size() && is_digit(src_[exp_end])) ++exp_end;
        end = exp_end;
      }
    }
    tok_.type = Tok::Number;
    tok_.text = src_.substr(pos_, end - pos_);
    const auto [ptr, ec] = std::from_chars(tok_.text.data(), tok_.text.data() + tok_.text.size(), tok_.number);
    if (ec != std::errc() || ptr != tok_.text.data() + tok_.text.size() || !std::isfinite(tok_.number)) {
      throw ParseError(tok_.offset, "finite number", "number '" + std::string(tok_.text) + "'");
    }
    pos_ = end;
  }

  std::string describe() const {
    switch (tok_.type) {
      case Tok::End: return "end of input";
      case Tok::Number: return "number '" + std::string(tok_.text) + "'";
      case Tok::Ident: return "identifier '" + std::string(tok_.text) + "'";
      case Tok::Invalid: {
        const auto byte = static_cast<unsigned char>(tok_.text[0]);
        char buf[16];
        if (byte >= 0x21 && byte < 0x7f)
          std::snprintf(buf, sizeof buf, "'%c'", static_cast<char>(byte));
        else
          std::snprintf(buf, sizeof buf, "byte 0x%02x", byte);
        return std::string("character ") + buf;
      }
      default: return "'" + std::string(tok_.text) + "'";
    }
  }

  [[noreturn]] void fail(const std::string& expected) const { throw ParseError(tok_.offset, expected, describe()); }

  void expect(Tok type, const char* what) {
    if (tok_.type != type) fail(what);
    advance();
  }

  struct DepthGuard {
    explicit DepthGuard(ExprParser& p) : parser(p) {
      if (++parser.depth_ > kMaxDepth) parser.fail("nesting depth of at most 256");
    }
    ~DepthGuard() { --parser.depth_; }
    ExprParser& parser;
  };

  Expr expression() {
    DepthGuard guard(*this);
    Expr lhs = term();
    while (tok_.type == Tok::Plus || tok_.type == Tok::Minus) {
      const auto kind = tok_.type == Tok::Plus ? Expr::Kind::Add : Expr::Kind::Sub;
      advance();
      lhs = Expr::binary(kind, lhs, term());
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = factor();
    while (tok_.type == Tok::Star || tok_.type == Tok::Slash) {
      const auto kind = tok_.type == Tok::Star ? Expr::Kind::Mul : Expr::Kind::Div;
      advance();
      lhs = Expr::binary(kind, lhs, factor());
    }
    return lhs;
  }

  Expr factor() {
    DepthGuard guard(*this);
    if (tok_.type == Tok::Minus) {
      advance();
      return Expr::unary(Expr::Kind::Negate, factor());
    }
    Expr base = atom();
    if (tok_.type == Tok::Caret) {
      advance();
      return Expr::binary(Expr::Kind::Power, base, factor());
    }
    return base;
  }

  Expr atom() {
    switch (tok_.type) {
      case Tok::Number: {
        const double v = tok_.number;
        advance();
        return Expr::number(v);
      }
      case Tok::LParen: {
        advance();
        Expr inner = expression();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident:
        return identifier();
      default:
        fail("number, 't', function call or '('");
    }
  }

  Expr identifier() {
    const std::string_view name = tok_.text;
    if (name == "t") {
      advance();
      return Expr::variable();
    }
    Expr::Kind kind;
    bool binary = false;
    if (name == "sqrt") kind = Expr::Kind::Sqrt;
    else if (name == "exp") kind = Expr::Kind::Exp;
    else if (name == "ln") kind = Expr::Kind::Ln;
    else if (name == "abs") kind = Expr::Kind::Abs;
    else if (name == "pow") kind = Expr::Kind::Pow, binary = true;
    else fail("'t' or one of sqrt, exp, ln, abs, pow");
    advance();
    expect(Tok::LParen, "'('");
    Expr first = expression();
    if (binary) {
      expect(Tok::Comma, "','");
      Expr second = expression();
      expect(Tok::RParen, "')'");
      return Expr::binary(kind, first, second);
    }
    expect(Tok::RParen, "')'");
    return Expr::unary(kind, first);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  Token tok_;
};

/// Parses `src`; throws ParseError with the byte offset of the offending token.
inline Expr parse(std::string_view src) { return ExprParser(src).parse(); }

inline double eval(const Expr& e, double t) { return e.eval(t); }
inline Expr differentiate(const Expr& e) { return e.derivative(); }
inline std::string render(const Expr& e) { return e.str(); }

}  // namespace choquet
