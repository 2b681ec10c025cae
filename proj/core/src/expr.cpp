// Copyright 2026 The fermijet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fermijet/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace fermijet {

ExprError::ExprError(Kind kind, int offset, const std::string& what)
    : std::runtime_error(what + " at offset " + std::to_string(offset)), kind_(kind), offset_(offset) {}

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make(ExprOp op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

NodePtr constant(double v) {
  auto n = std::make_shared<ExprNode>();
  n->value = v;
  return n;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

double fold(const ExprNode& n) {
  switch (n.op) {
    case ExprOp::kConstant: return n.value;
    case ExprOp::kVariable: return std::nan("");
    case ExprOp::kAdd: return fold(*n.lhs) + fold(*n.rhs);
    case ExprOp::kSub: return fold(*n.lhs) - fold(*n.rhs);
    case ExprOp::kMul: return fold(*n.lhs) * fold(*n.rhs);
    case ExprOp::kDiv: return fold(*n.lhs) / fold(*n.rhs);
    case ExprOp::kPow: return std::pow(fold(*n.lhs), n.exponent);
    case ExprOp::kNeg: return -fold(*n.lhs);
    case ExprOp::kSin: return std::sin(fold(*n.lhs));
    case ExprOp::kCos: return std::cos(fold(*n.lhs));
    case ExprOp::kExp: return std::exp(fold(*n.lhs));
    case ExprOp::kSqrt: return std::sqrt(fold(*n.lhs));
  }
  return std::nan("");
}

class Parser {
 public:
  Parser(std::string_view src, std::span<const std::string> vars) : src_(src), vars_(vars) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != static_cast<int>(src_.size())) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  std::string_view src_;
  std::span<const std::string> vars_;
  int pos_ = 0;

  [[noreturn]] void fail(const std::string& msg, int at = -1) const {
    throw ExprError(ExprError::Kind::kSyntax, at < 0 ? pos_ : at, msg);
  }

  void skip() {
    while (pos_ < static_cast<int>(src_.size()) && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  char peek() {
    skip();
    return pos_ < static_cast<int>(src_.size()) ? src_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (char c = peek(); c == '+' || c == '-'; c = peek()) {
      ++pos_;
      lhs = make(c == '+' ? ExprOp::kAdd : ExprOp::kSub, lhs, term());
    }
    return lhs;
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (char c = peek(); c == '*' || c == '/'; c = peek()) {
      ++pos_;
      lhs = make(c == '*' ? ExprOp::kMul : ExprOp::kDiv, lhs, unary());
    }
    return lhs;
  }

  NodePtr unary() {
    if (peek() == '-') {
      ++pos_;
      return make(ExprOp::kNeg, unary());
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (peek() != '^') return base;
    ++pos_;
    skip();
    const int at = pos_;
    const NodePtr ex = unary();
    const double v = fold(*ex);
    if (!std::isfinite(v) || v != std::round(v) || std::abs(v) > 1024)
      throw ExprError(ExprError::Kind::kNonIntegerExponent, at, "exponent must be a constant integer");
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::kPow;
    n->lhs = base;
    n->exponent = static_cast<int>(v);
    return n;
  }

  NodePtr atom() {
    const char c = peek();
    const int at = pos_;
    if (c == '\0') fail("unexpected end of input");
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (peek() != ')') fail("expected ')'");
      ++pos_;
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (is_ident_start(c)) {
      while (pos_ < static_cast<int>(src_.size()) && is_ident_char(src_[pos_])) ++pos_;
      const std::string name(src_.substr(at, pos_ - at));
      if (peek() == '(') {
        ExprOp op;
        if (name == "sin") op = ExprOp::kSin;
        else if (name == "cos") op = ExprOp::kCos;
        else if (name == "exp") op = ExprOp::kExp;
        else if (name == "sqrt") op = ExprOp::kSqrt;
        else throw ExprError(ExprError::Kind::kUnknownIdentifier, at, "unknown function '" + name + "'");
        ++pos_;
        NodePtr arg = expr();
        if (peek() != ')') fail("expected ')'");
        ++pos_;
        return make(op, arg);
      }
      for (std::size_t v = 0; v < vars_.size(); ++v)
        if (vars_[v] == name) {
          auto n = std::make_shared<ExprNode>();
          n->op = ExprOp::kVariable;
          n->var = static_cast<int>(v);
          return n;
        }
      if (name == "pi") return constant(std::numbers::pi);
      throw ExprError(ExprError::Kind::kUnknownIdentifier, at, "unknown identifier '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const int at = pos_;
    const int n = static_cast<int>(src_.size());
    while (pos_ < n && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < n && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < n && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < n && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      int q = pos_ + 1;
      if (q < n && (src_[q] == '+' || src_[q] == '-')) ++q;
      if (q < n && std::isdigit(static_cast<unsigned char>(src_[q]))) {
        pos_ = q;
        while (pos_ < n && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    const auto r = std::from_chars(src_.data() + at, src_.data() + pos_, v);
    if (r.ec != std::errc() || r.ptr != src_.data() + pos_ || !std::isfinite(v)) fail("malformed number", at);
    return constant(v);
  }
};

// Printing precedence: sums 1, products 2, negation 3, powers 4, atoms 5.
int level(const ExprNode& n) {
  switch (n.op) {
    case ExprOp::kAdd:
    case ExprOp::kSub: return 1;
    case ExprOp::kMul:
    case ExprOp::kDiv: return 2;
    case ExprOp::kNeg: return 3;
    case ExprOp::kPow: return 4;
    case ExprOp::kConstant: return n.value < 0 || std::signbit(n.value) ? 0 : 5;
    default: return 5;
  }
}

void print(const ExprNode& n, const std::vector<std::string>& vars, std::string& out);

void print_wrapped(const ExprNode& n, bool wrap, const std::vector<std::string>& vars, std::string& out) {
  if (wrap) out += '(';
  print(n, vars, out);
  if (wrap) out += ')';
}

void print(const ExprNode& n, const std::vector<std::string>& vars, std::string& out) {
  const int p = level(n);
  switch (n.op) {
    case ExprOp::kConstant: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      return;
    }
    case ExprOp::kVariable:
      out += vars.at(n.var);
      return;
    case ExprOp::kAdd:
    case ExprOp::kSub:
    case ExprOp::kMul:
    case ExprOp::kDiv: {
      static const char sym[] = {'+', '-', '*', '/'};
      print_wrapped(*n.lhs, level(*n.lhs) < p, vars, out);
      out += ' ';
      out += sym[static_cast<int>(n.op) - static_cast<int>(ExprOp::kAdd)];
      out += ' ';
      print_wrapped(*n.rhs, level(*n.rhs) <= p, vars, out);
      return;
    }
    case ExprOp::kNeg:
      out += '-';
      print_wrapped(*n.lhs, level(*n.lhs) < p, vars, out);
      return;
    case ExprOp::kPow:
      print_wrapped(*n.lhs, level(*n.lhs) < 5, vars, out);
      out += n.exponent < 0 ? "^(" + std::to_string(n.exponent) + ")" : "^" + std::to_string(n.exponent);
      return;
    case ExprOp::kSin:
    case ExprOp::kCos:
    case ExprOp::kExp:
    case ExprOp::kSqrt: {
      static const char* const names[] = {"sin", "cos", "exp", "sqrt"};
      out += names[static_cast<int>(n.op) - static_cast<int>(ExprOp::kSin)];
      print_wrapped(*n.lhs, true, vars, out);
      return;
    }
  }
}

double apply(ExprOp op, double x) {
  switch (op) {
    case ExprOp::kSin: return std::sin(x);
    case ExprOp::kCos: return std::cos(x);
    case ExprOp::kExp: return std::exp(x);
    default:
      if (x < 0.0) throw JetError("sqrt of a negative number");
      return std::sqrt(x);
  }
}

Jet apply(ExprOp op, const Jet& x) {
  switch (op) {
    case ExprOp::kSin: return sin(x);
    case ExprOp::kCos: return cos(x);
    case ExprOp::kExp: return exp(x);
    default: return sqrt(x);
  }
}

template <class T>
T eval(const ExprNode& n, std::span<const T> args, const T& zero) {
  switch (n.op) {
    case ExprOp::kConstant: return zero + n.value;
    case ExprOp::kVariable: return args[n.var];
    case ExprOp::kAdd: return eval(*n.lhs, args, zero) + eval(*n.rhs, args, zero);
    case ExprOp::kSub: return eval(*n.lhs, args, zero) - eval(*n.rhs, args, zero);
    case ExprOp::kMul: return eval(*n.lhs, args, zero) * eval(*n.rhs, args, zero);
    case ExprOp::kDiv: {
      const T d = eval(*n.rhs, args, zero);
      if constexpr (std::is_same_v<T, double>) {
        if (d == 0.0) throw JetError("division by zero");
      }
      return eval(*n.lhs, args, zero) / d;
    }
    case ExprOp::kPow: {
      const T b = eval(*n.lhs, args, zero);
      if constexpr (std::is_same_v<T, double>) {
        if (b == 0.0 && n.exponent < 0) throw JetError("negative power of zero");
        return std::pow(b, n.exponent);
      } else {
        return pow(b, n.exponent);
      }
    }
    case ExprOp::kNeg: return -eval(*n.lhs, args, zero);
    case ExprOp::kSin:
    case ExprOp::kCos:
    case ExprOp::kExp:
    case ExprOp::kSqrt: return apply(n.op, eval(*n.lhs, args, zero));
  }
  return zero;
}

bool references(const ExprNode& n, int var) {
  if (n.op == ExprOp::kVariable) return n.var == var;
  return (n.lhs && references(*n.lhs, var)) || (n.rhs && references(*n.rhs, var));
}

}  // namespace

bool Expression::independent_of(int var) const { return !root_ || !references(*root_, var); }

Jet Expression::operator()(std::span<const Jet> args) const {
  if (args.size() != vars_.size()) throw JetError("expression: expected " + std::to_string(vars_.size()) + " arguments");
  if (args.empty()) throw JetError("expression: jet evaluation needs at least one argument");
  return eval<Jet>(*root_, args, Jet(args[0].layout()));
}

double Expression::operator()(std::span<const double> args) const {
  if (args.size() != vars_.size()) throw JetError("expression: expected " + std::to_string(vars_.size()) + " arguments");
  return eval<double>(*root_, args, 0.0);
}

Expression parse_expression(std::string_view src, std::span<const std::string> vars) {
  return Expression(Parser(src, vars).parse(), std::vector<std::string>(vars.begin(), vars.end()));
}

std::string to_string(const Expression& e) {
  std::string out;
  if (!e.empty()) print(e.root(), e.variables(), out);
  return out;
}

bool same_tree(const ExprNode& a, const ExprNode& b) {
  if (a.op != b.op || a.var != b.var || a.exponent != b.exponent) return false;
  if (a.op == ExprOp::kConstant && !(a.value == b.value && std::signbit(a.value) == std::signbit(b.value)))
    return false;
  if (!a.lhs != !b.lhs || !a.rhs != !b.rhs) return false;
  return (!a.lhs || same_tree(*a.lhs, *b.lhs)) && (!a.rhs || same_tree(*a.rhs, *b.rhs));
}

}  // namespace fermijet
