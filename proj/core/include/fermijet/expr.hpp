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

// Expression language for metric and embedding components.
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?          exponent must fold to an integer
//   atom   := number | name | name '(' expr ')' | '(' expr ')'
//
// Functions: sin cos exp sqrt. Constant: pi.

#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fermijet/jet.hpp"

namespace fermijet {

class ExprError : public std::runtime_error {
 public:
  enum class Kind { kSyntax, kUnknownIdentifier, kNonIntegerExponent };
  ExprError(Kind kind, int offset, const std::string& what);
  Kind kind() const { return kind_; }
  int offset() const { return offset_; }

 private:
  Kind kind_;
  int offset_;
};

enum class ExprOp { kConstant, kVariable, kAdd, kSub, kMul, kDiv, kPow, kNeg, kSin, kCos, kExp, kSqrt };

struct ExprNode {
  ExprOp op = ExprOp::kConstant;
  double value = 0.0;  // kConstant
  int var = -1;        // kVariable
  int exponent = 0;    // kPow
  std::shared_ptr<const ExprNode> lhs;
  std::shared_ptr<const ExprNode> rhs;
};

class Expression {
 public:
  Expression() = default;
  Expression(std::shared_ptr<const ExprNode> root, std::vector<std::string> vars)
      : root_(std::move(root)), vars_(std::move(vars)) {}

  const ExprNode& root() const { return *root_; }
  const std::vector<std::string>& variables() const { return vars_; }
  bool empty() const { return !root_; }

  /// True if the expression does not reference variable `var`.
  bool independent_of(int var) const;

  Jet operator()(std::span<const Jet> args) const;
  double operator()(std::span<const double> args) const;

 private:
  std::shared_ptr<const ExprNode> root_;
  std::vector<std::string> vars_;
};

Expression parse_expression(std::string_view src, std::span<const std::string> vars);

/// Minimal-parenthesis rendering; constants use %.17g so the text reparses to
/// an identical tree.
std::string to_string(const Expression& e);

bool same_tree(const ExprNode& a, const ExprNode& b);

}  // namespace fermijet
