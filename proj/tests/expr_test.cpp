#include "fermijet/expr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

namespace fermijet {
namespace {

const std::vector<std::string> kVars = {"x", "u", "th", "eps"};

Expression parse(const std::string& s) { return parse_expression(s, kVars); }

double eval(const std::string& s, std::vector<double> at) { return parse(s)(std::span<const double>(at)); }

TEST(Expr, OnePlusUSquaredOnJets) {
  const auto e = parse_expression("1 + u^2", std::vector<std::string>{"x", "u"});
  const auto lay = JetLayout::get(2, 3);
  const std::vector<Jet> z = {Jet::variable(lay, 0, 0.2), Jet::variable(lay, 1, 0.5)};
  const Jet r = e(z);
  EXPECT_DOUBLE_EQ(r.value(), 1.25);
  EXPECT_DOUBLE_EQ(r.coeff(MultiIndex({0, 1})), 1.0);
  EXPECT_DOUBLE_EQ(r.coeff(MultiIndex({0, 2})), 1.0);
  EXPECT_DOUBLE_EQ(r.coeff(MultiIndex({1, 0})), 0.0);
  EXPECT_DOUBLE_EQ(r.coeff(MultiIndex({0, 3})), 0.0);
}

TEST(Expr, SinSquaredAtHalfPi) {
  const auto e = parse_expression("sin(th)^2", std::vector<std::string>{"th"});
  const double at[] = {std::acos(-1.0) / 2};
  EXPECT_NEAR(e(std::span<const double>(at)), 1.0, 1e-15);
}

TEST(Expr, SyntaxErrorOffset) {
  try {
    parse("x +* 2");
    FAIL() << "expected a syntax error";
  } catch (const ExprError& e) {
    EXPECT_EQ(e.kind(), ExprError::Kind::kSyntax);
    EXPECT_EQ(e.offset(), 3);
  }
}

TEST(Expr, ErrorKinds) {
  auto kind_of = [](const std::string& s) {
    try {
      parse(s);
    } catch (const ExprError& e) {
      return e.kind();
    }
    ADD_FAILURE() << s << " parsed";
    return ExprError::Kind::kSyntax;
  };
  EXPECT_EQ(kind_of("y + 1"), ExprError::Kind::kUnknownIdentifier);
  EXPECT_EQ(kind_of("tan(x)"), ExprError::Kind::kUnknownIdentifier);
  EXPECT_EQ(kind_of("x^0.5"), ExprError::Kind::kNonIntegerExponent);
  EXPECT_EQ(kind_of("x^u"), ExprError::Kind::kNonIntegerExponent);
  EXPECT_EQ(kind_of("(x + 1"), ExprError::Kind::kSyntax);
  EXPECT_EQ(kind_of(""), ExprError::Kind::kSyntax);
  EXPECT_EQ(kind_of("x 1"), ExprError::Kind::kSyntax);
  EXPECT_EQ(kind_of("sin x"), ExprError::Kind::kUnknownIdentifier);  // a bare function name
  try {
    parse("1 + foo");
  } catch (const ExprError& e) {
    EXPECT_EQ(e.offset(), 4);
  }
}

TEST(Expr, Precedence) {
  const std::vector<double> at = {2.0, 3.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(eval("-x^2", at), -4.0);
  EXPECT_DOUBLE_EQ(eval("x^-1", at), 0.5);
  EXPECT_DOUBLE_EQ(eval("2^3^2", at), 512.0);
  EXPECT_DOUBLE_EQ(eval("x - u - 1", at), -2.0);
  EXPECT_DOUBLE_EQ(eval("x / u * 3", at), 2.0);
  EXPECT_DOUBLE_EQ(eval("(x + u) * 2", at), 10.0);
  EXPECT_DOUBLE_EQ(eval("x^(1+1)", at), 4.0);
  EXPECT_NEAR(eval("pi", at), std::acos(-1.0), 1e-15);
}

TEST(Expr, EvaluationGuards) {
  const std::vector<double> at = {0.0, -1.0, 0.0, 0.0};
  EXPECT_THROW(eval("1 / x", at), JetError);
  EXPECT_THROW(eval("sqrt(u)", at), JetError);
  EXPECT_THROW(eval("x^-2", at), JetError);
  const auto lay = JetLayout::get(1, 2);
  const auto e = parse_expression("sqrt(x)", std::vector<std::string>{"x"});
  const std::vector<Jet> z = {Jet::variable(lay, 0, 0.0)};
  EXPECT_THROW(e(z), JetError);
}

TEST(Expr, JetMatchesDoubleEvaluation) {
  const auto e = parse("exp(x) * cos(u) / (2 + sin(th)) - sqrt(1 + x^2)");
  const auto lay = JetLayout::get(4, 0);
  const std::vector<double> at = {0.3, -0.7, 1.1, 0.0};
  std::vector<Jet> z;
  for (int i = 0; i < 4; ++i) z.push_back(Jet::variable(lay, i, at[i]));
  EXPECT_NEAR(e(z).value(), e(std::span<const double>(at)), 1e-15);
}

TEST(Expr, IndependentOf) {
  const auto e = parse("x * sin(th) + 3");
  EXPECT_FALSE(e.independent_of(0));
  EXPECT_TRUE(e.independent_of(1));
  EXPECT_FALSE(e.independent_of(2));
}

const char* kCorpus[] = {
    "1",
    "x",
    "-x",
    "--x",
    "1 + u^2",
    "sin(th)^2",
    "x + u * th",
    "(x + u) * th",
    "x - (u - th)",
    "x - u - th",
    "x / (u * th)",
    "x / u / th",
    "x / u * th",
    "-x^2",
    "(-x)^2",
    "x^-2",
    "x^(-2)",
    "2^3^2",
    "(2^3)^2",
    "x^2^2",
    "-(x + u)",
    "-(x * u)",
    "-2 * x",
    "x * -2",
    "x - -u",
    "x + -u",
    "0.1 + 0.2",
    "1e-300 * x",
    "6.02214076e23",
    "3.141592653589793 * th",
    "pi / 2",
    "sin(pi * x)",
    "cos(x)^2 + sin(x)^2",
    "exp(-x^2 / 2)",
    "sqrt(1 + x^2)",
    "sqrt(sqrt(x^4 + 1))",
    "1 / (1 + eps * x^2)",
    "1 + eps * (0.5 * x + 0.25 * u^2 - 0.125 * x * u * th)",
    "(1 + u)^2",
    "(1 + u * cos(x))^2",
    "sin(x) * cos(u) * exp(th)",
    "x * (u * (th * (x + 1)))",
    "((x))",
    "-(-(-x))",
    "x^0",
    "(x / u)^3",
    "-x / -u",
    "exp(x)^-1 - exp(-x)",
    "0.3 * th + x",
    "1 - eps * x * u^3 / 6",
};

TEST(Expr, RoundTripCorpus) {
  int count = 0;
  for (const char* src : kCorpus) {
    const Expression a = parse(src);
    const std::string printed = to_string(a);
    const Expression b = parse(printed);
    EXPECT_TRUE(same_tree(a.root(), b.root())) << src << " -> " << printed;
    EXPECT_EQ(to_string(b), printed) << src;
    ++count;
  }
  EXPECT_EQ(count, 50);
}

TEST(Expr, PrinterUsesMinimalParentheses) {
  EXPECT_EQ(to_string(parse("((x + u)) * th")), "(x + u) * th");
  EXPECT_EQ(to_string(parse("(x * u) + th")), "x * u + th");
  EXPECT_EQ(to_string(parse("x - (u + th)")), "x - (u + th)");
}

}  // namespace
}  // namespace fermijet
