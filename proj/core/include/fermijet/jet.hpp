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

// Truncated multivariate Taylor series ("jets").
//
// A Jet over n variables truncated at order P stores the Taylor coefficients
// c_K = d^K f / K! for every multi-index K with |K| <= P, densely, in
// graded-lexicographic order. Arithmetic never produces terms above P.
//
// References:
//   Neidinger, "Directions for computing truncated multivariate Taylor series".
//   Griewank & Walther, "Evaluating Derivatives", ch. 13.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fermijet {

class JetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exponent vector of a monomial z^K.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);
  static MultiIndex zero(int nvars) { return MultiIndex(std::vector<int>(nvars, 0)); }
  static MultiIndex unit(int nvars, int var);

  int nvars() const { return static_cast<int>(exps_.size()); }
  int order() const { return order_; }
  int operator[](int var) const { return exps_[var]; }
  const std::vector<int>& exponents() const { return exps_; }

  /// K! = prod_i K_i!
  double factorial() const;

  MultiIndex operator+(const MultiIndex& other) const;
  bool operator==(const MultiIndex&) const = default;

  std::string str() const;

 private:
  std::vector<int> exps_;
  int order_ = 0;
};

struct JetConfig {
  int nvars = 1;
  int order = 0;
  std::vector<std::string> names;  // optional, for reporting

  void validate() const;
};

/// Shared, immutable monomial enumeration for a (nvars, order) pair.
class JetLayout {
 public:
  static std::shared_ptr<const JetLayout> get(int nvars, int order);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(monomials_.size()); }

  const MultiIndex& monomial(int idx) const { return monomials_[idx]; }
  /// Position of K in the dense coefficient array, or -1 if |K| > order.
  int index_of(const MultiIndex& k) const;
  /// First position of the block of monomials of total degree d.
  int degree_begin(int d) const { return degree_start_[d]; }
  int degree_end(int d) const { return degree_start_[d + 1]; }
  int degree_of(int idx) const { return degree_[idx]; }

  /// Index of monomial idx times z_var, or -1 if it leaves the truncation.
  int raise(int idx, int var) const { return raise_[idx * nvars_ + var]; }
  double factorial(int idx) const { return factorial_[idx]; }

  struct Triple {
    std::int32_t lhs, rhs, out;
  };
  /// All (i, j, k) with monomial_i * monomial_j = monomial_k within order.
  const std::vector<Triple>& product_table() const { return products_; }

 private:
  JetLayout(int nvars, int order);

  int nvars_;
  int order_;
  std::vector<MultiIndex> monomials_;
  std::vector<int> degree_;
  std::vector<int> degree_start_;
  std::vector<int> raise_;
  std::vector<double> factorial_;
  std::vector<Triple> products_;
  std::vector<std::pair<std::uint64_t, int>> lookup_;  // sorted key -> idx

  std::uint64_t key(const std::vector<int>& e) const;
};

using LayoutPtr = std::shared_ptr<const JetLayout>;

class Jet {
 public:
  Jet() = default;
  explicit Jet(LayoutPtr layout);
  Jet(LayoutPtr layout, double constant);
  Jet(int nvars, int order, double constant = 0.0);

  static Jet constant(const JetConfig& cfg, double value);
  /// The seeded coordinate function z_index + value.
  static Jet variable(const JetConfig& cfg, int index, double value);
  static Jet variable(const LayoutPtr& layout, int index, double value);

  const LayoutPtr& layout() const { return layout_; }
  int nvars() const { return layout_->nvars(); }
  int order() const { return layout_->order(); }
  int size() const { return static_cast<int>(c_.size()); }

  double value() const { return c_[0]; }
  /// Raw Taylor coefficient c_K.
  double coeff(const MultiIndex& k) const;
  double coeff_at(int idx) const { return c_[idx]; }
  double& coeff_at(int idx) { return c_[idx]; }
  void set_coeff(const MultiIndex& k, double v);
  std::span<const double> coeffs() const { return c_; }
  std::span<double> coeffs() { return c_; }

  /// d^K f = K! c_K.
  double derivative(const MultiIndex& k) const;

  bool is_constant() const;
  bool same_shape(const Jet& other) const { return layout_ == other.layout_; }
  /// Largest |c_K| over all stored coefficients.
  double max_abs() const;

  Jet& operator+=(const Jet& b);
  Jet& operator-=(const Jet& b);
  Jet& operator*=(const Jet& b);
  Jet& operator+=(double s);
  Jet& operator-=(double s);
  Jet& operator*=(double s);
  Jet& operator/=(double s);
  Jet operator-() const;

  /// Accumulates a * b into *this (all three must share a layout).
  void add_product(const Jet& a, const Jet& b, double scale = 1.0);

 private:
  LayoutPtr layout_;
  std::vector<double> c_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(Jet a, double s);
Jet operator+(double s, Jet a);
Jet operator-(Jet a, double s);
Jet operator-(double s, const Jet& a);
Jet operator*(Jet a, double s);
Jet operator*(double s, Jet a);
Jet operator/(Jet a, double s);
Jet operator/(double s, const Jet& a);

Jet reciprocal(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet pow(const Jet& a, int n);

/// Partial derivative in variable var; the result is truncated at order - 1.
Jet differentiate(const Jet& a, int var);
/// Drops every term above order q (q <= a.order()).
Jet truncate(const Jet& a, int q);
/// Re-embeds a into a layout of higher order; the new top terms are zero.
Jet extend(const Jet& a, int q);
/// Keeps only monomials whose exponents on the listed variables sum to degree.
Jet homogeneous_part(const Jet& a, std::span<const int> vars, int degree);
/// Sets every listed variable to zero.
Jet restrict_zero(const Jet& a, std::span<const int> vars);
/// Evaluates the polynomial at a real point.
double evaluate(const Jet& a, std::span<const double> point);

/// Precomputed monomials delta^K for substituting zero-constant inner jets
/// into many outer jets over the same variables.
class Substitution {
 public:
  Substitution(std::span<const Jet> deltas, int outer_order);

  int outer_nvars() const { return static_cast<int>(outer_->nvars()); }
  /// outer(delta_1, ..., delta_m); outer must be centered at zero.
  Jet apply(const Jet& outer) const;

 private:
  LayoutPtr inner_;
  LayoutPtr outer_;
  std::vector<Jet> powers_;  // indexed by monomial index of outer_
};

/// Taylor composition outer(inner_1, ..., inner_m). Every inner jet must have
/// zero constant term; the outer jet is an expansion about the origin.
Jet compose(const Jet& outer, std::span<const Jet> inners);

/// Applies a univariate Taylor polynomial sum_k d_k h^k, h = a - a(0).
Jet apply_series(const Jet& a, std::span<const double> series);

}  // namespace fermijet
