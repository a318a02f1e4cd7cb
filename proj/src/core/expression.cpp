// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

// Recursive-descent parser and tree evaluator for symbol expressions.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string_view>

#include "mslab/error.hpp"
#include "mslab/symbols.hpp"

namespace mslab {
namespace {

enum class Var { r2, xi1, xi2, xi1y, xi2y };

enum class Fn { exp, log, sqrt, abs, sin, cos };

enum class Kind { constant, variable, neg, add, sub, mul, div, pow, call };

struct Node {
  Kind kind;
  cplx value{};
  Var var = Var::r2;
  Fn fn = Fn::exp;
  int lhs = -1;
  int rhs = -1;
};

struct Token {
  enum Type { number, ident, op, lparen, rparen, end } type;
  std::string_view text;
  std::size_t offset;
  double number_value = 0.0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= src_.size()) return {Token::end, {}, start};
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      // strtod needs a terminated buffer; the source string is one.
      const char* begin = src_.data() + pos_;
      char* stop = nullptr;
      const double v = std::strtod(begin, &stop);
      if (stop == begin) throw ParseError("syntax error: malformed number", start);
      pos_ += static_cast<std::size_t>(stop - begin);
      return {Token::number, src_.substr(start, pos_ - start), start, v};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      return {Token::ident, src_.substr(start, pos_ - start), start};
    }
    ++pos_;
    switch (c) {
      case '+':
      case '-':
      case '*':
      case '/':
      case '^':
        return {Token::op, src_.substr(start, 1), start};
      case '(':
        return {Token::lparen, src_.substr(start, 1), start};
      case ')':
        return {Token::rparen, src_.substr(start, 1), start};
      default:
        throw ParseError(std::string("syntax error: unexpected character '") + c + "'", start);
    }
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { advance(); }

  std::vector<Node> parse(int& root, bool& uses_second) {
    root = parse_expr();
    if (tok_.type != Token::end) {
      throw ParseError("syntax error: unexpected '" + std::string(tok_.text) + "'", tok_.offset);
    }
    uses_second = uses_second_;
    return std::move(nodes_);
  }

 private:
  void advance() { tok_ = lexer_.next(); }

  bool at_op(char c) const { return tok_.type == Token::op && tok_.text[0] == c; }

  int add(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int parse_expr() {
    int left = parse_term();
    while (at_op('+') || at_op('-')) {
      const Kind k = at_op('+') ? Kind::add : Kind::sub;
      advance();
      const int right = parse_term();
      left = add({k, {}, Var::r2, Fn::exp, left, right});
    }
    return left;
  }

  int parse_term() {
    int left = parse_unary();
    while (at_op('*') || at_op('/')) {
      const Kind k = at_op('*') ? Kind::mul : Kind::div;
      advance();
      const int right = parse_unary();
      left = add({k, {}, Var::r2, Fn::exp, left, right});
    }
    return left;
  }

  int parse_unary() {
    if (at_op('-')) {
      advance();
      const int operand = parse_unary();
      return add({Kind::neg, {}, Var::r2, Fn::exp, operand, -1});
    }
    if (at_op('+')) {
      advance();
      return parse_unary();
    }
    return parse_power();
  }

  // Right-associative; the exponent may carry its own sign: 2^-x.
  int parse_power() {
    const int base = parse_primary();
    if (at_op('^')) {
      advance();
      const int exponent = parse_unary();
      return add({Kind::pow, {}, Var::r2, Fn::exp, base, exponent});
    }
    return base;
  }

  int parse_primary() {
    switch (tok_.type) {
      case Token::number: {
        const double v = tok_.number_value;
        advance();
        return add({Kind::constant, cplx(v, 0.0)});
      }
      case Token::lparen: {
        advance();
        const int inner = parse_expr();
        if (tok_.type != Token::rparen) throw ParseError("syntax error: expected ')'", tok_.offset);
        advance();
        return inner;
      }
      case Token::ident:
        return parse_identifier();
      case Token::end:
        throw ParseError("syntax error: expected an expression", tok_.offset);
      default:
        throw ParseError("syntax error: unexpected '" + std::string(tok_.text) + "'",
                         tok_.offset);
    }
  }

  int parse_identifier() {
    const std::string name(tok_.text);
    const std::size_t offset = tok_.offset;
    advance();
    if (tok_.type == Token::lparen) {
      Fn fn;
      if (name == "exp") fn = Fn::exp;
      else if (name == "log") fn = Fn::log;
      else if (name == "sqrt") fn = Fn::sqrt;
      else if (name == "abs") fn = Fn::abs;
      else if (name == "sin") fn = Fn::sin;
      else if (name == "cos") fn = Fn::cos;
      else throw ParseError("unknown function '" + name + "'", offset);
      advance();
      const int arg = parse_expr();
      if (tok_.type != Token::rparen) throw ParseError("syntax error: expected ')'", tok_.offset);
      advance();
      return add({Kind::call, {}, Var::r2, fn, arg, -1});
    }
    if (name == "pi") return add({Kind::constant, cplx(std::numbers::pi, 0.0)});
    if (name == "e") return add({Kind::constant, cplx(std::numbers::e, 0.0)});
    if (name == "i") return add({Kind::constant, cplx(0.0, 1.0)});
    Var v;
    if (name == "r2") v = Var::r2;
    else if (name == "xi1") v = Var::xi1;
    else if (name == "xi2") v = Var::xi2;
    else if (name == "xi1y") v = Var::xi1y;
    else if (name == "xi2y") v = Var::xi2y;
    else throw ParseError("unknown identifier '" + name + "'", offset);
    if (v == Var::xi2 || v == Var::xi2y) uses_second_ = true;
    return add({Kind::variable, {}, v});
  }

  Lexer lexer_;
  Token tok_{Token::end, {}, 0};
  std::vector<Node> nodes_;
  bool uses_second_ = false;
};

bool is_real(const cplx& z) { return z.imag() == 0.0; }

cplx power(const cplx& a, const cplx& b) {
  if (is_real(a) && is_real(b) && (a.real() >= 0.0 || std::floor(b.real()) == b.real())) {
    return {std::pow(a.real(), b.real()), 0.0};
  }
  return std::pow(a, b);
}

cplx call(Fn fn, const cplx& z) {
  const bool real = is_real(z);
  const double x = z.real();
  switch (fn) {
    case Fn::exp:
      return real ? cplx(std::exp(x), 0.0) : std::exp(z);
    case Fn::log:
      return real && x >= 0.0 ? cplx(std::log(x), 0.0) : std::log(z);
    case Fn::sqrt:
      return real && x >= 0.0 ? cplx(std::sqrt(x), 0.0) : std::sqrt(z);
    case Fn::abs:
      return {std::abs(z), 0.0};
    case Fn::sin:
      return real ? cplx(std::sin(x), 0.0) : std::sin(z);
    case Fn::cos:
      return real ? cplx(std::cos(x), 0.0) : std::cos(z);
  }
  return {};
}

struct Program {
  std::vector<Node> nodes;
  int root = 0;

  cplx eval(int i, const double vars[5]) const {
    const Node& n = nodes[static_cast<std::size_t>(i)];
    switch (n.kind) {
      case Kind::constant:
        return n.value;
      case Kind::variable:
        return {vars[static_cast<int>(n.var)], 0.0};
      case Kind::neg:
        return -eval(n.lhs, vars);
      case Kind::add:
        return eval(n.lhs, vars) + eval(n.rhs, vars);
      case Kind::sub:
        return eval(n.lhs, vars) - eval(n.rhs, vars);
      case Kind::mul: {
        const cplx a = eval(n.lhs, vars);
        const cplx b = eval(n.rhs, vars);
        if (is_real(a) && is_real(b)) return {a.real() * b.real(), 0.0};
        return a * b;
      }
      case Kind::div: {
        const cplx a = eval(n.lhs, vars);
        const cplx b = eval(n.rhs, vars);
        if (is_real(a) && is_real(b)) return {a.real() / b.real(), 0.0};
        return a / b;
      }
      case Kind::pow:
        return power(eval(n.lhs, vars), eval(n.rhs, vars));
      case Kind::call:
        return call(n.fn, eval(n.lhs, vars));
    }
    return {};
  }
};

}  // namespace

Symbol parse_symbol(const std::string& source, int arity_hint) {
  if (arity_hint < 0 || arity_hint > 2) throw ConfigError("arity hint must be 0, 1 or 2");
  Parser parser(source);
  auto program = std::make_shared<Program>();
  bool uses_second = false;
  program->nodes = parser.parse(program->root, uses_second);
  int arity = arity_hint == 0 ? 2 : arity_hint;
  if (uses_second) {
    if (arity_hint == 1) {
      throw ConfigError("expression uses a second frequency argument but arity 1 was requested");
    }
    arity = 2;
  }
  auto fn = [program](const Freq& a, const Freq& b) {
    const double r2 = a[0] * a[0] + a[1] * a[1] + b[0] * b[0] + b[1] * b[1];
    const double vars[5] = {r2, a[0], b[0], a[1], b[1]};
    return program->eval(program->root, vars);
  };
  return Symbol(arity, fn, "expr:" + source);
}

}  // namespace mslab
