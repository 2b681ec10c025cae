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

#include "fermijet/jet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace fermijet {

// ---------------------------------------------------------------------------
// MultiIndex

MultiIndex::MultiIndex(std::vector<int> exponents) : exps_(std::move(exponents)) {
  for (int e : exps_) {
    if (e < 0) throw JetError("MultiIndex: negative exponent");
    order_ += e;
  }
}

MultiIndex MultiIndex::unit(int nvars, int var) {
  if (var < 0 || var >= nvars) throw JetError("MultiIndex::unit: variable out of range");
  std::vector<int> e(nvars, 0);
  e[var] = 1;
  return MultiIndex(std::move(e));
}

double MultiIndex::factorial() const {
  double f = 1.0;
  for (int e : exps_)
    for (int i = 2; i <= e; ++i) f *= i;
  return f;
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (other.nvars() != nvars()) throw JetError("MultiIndex: length mismatch");
  std::vector<int> e(exps_);
  for (int i = 0; i < nvars(); ++i) e[i] += other.exps_[i];
  return MultiIndex(std::move(e));
}

std::string MultiIndex::str() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < nvars(); ++i) os << (i ? "," : "") << exps_[i];
  os << ')';
  return os.str();
}

void JetConfig::validate() const {
  if (nvars < 1) throw JetError("JetConfig: nvars must be >= 1");
  if (order < 0) throw JetError("JetConfig: order must be >= 0");
  if (!names.empty() && static_cast<int>(names.size()) != nvars)
    throw JetError("JetConfig: names must match nvars");
}

// ---------------------------------------------------------------------------
// JetLayout

namespace {

void enumerate_degree(int nvars, int degree, std::vector<int>& cur, int var,
                      std::vector<MultiIndex>& out) {
  if (var == nvars - 1) {
    cur[var] = degree;
    out.emplace_back(cur);
    return;
  }
  for (int e = degree; e >= 0; --e) {
    cur[var] = e;
    enumerate_degree(nvars, degree - e, cur, var + 1, out);
  }
  cur[var] = 0;
}

}  // namespace

JetLayout::JetLayout(int nvars, int order) : nvars_(nvars), order_(order) {
  std::vector<int> cur(nvars, 0);
  degree_start_.push_back(0);
  for (int d = 0; d <= order; ++d) {
    enumerate_degree(nvars, d, cur, 0, monomials_);
    degree_start_.push_back(static_cast<int>(monomials_.size()));
  }
  const int n = size();
  degree_.resize(n);
  factorial_.resize(n);
  lookup_.reserve(n);
  for (int i = 0; i < n; ++i) {
    degree_[i] = monomials_[i].order();
    factorial_[i] = monomials_[i].factorial();
    lookup_.emplace_back(key(monomials_[i].exponents()), i);
  }
  std::sort(lookup_.begin(), lookup_.end());

  raise_.assign(static_cast<std::size_t>(n) * nvars, -1);
  for (int i = 0; i < n; ++i) {
    if (degree_[i] == order) continue;
    for (int v = 0; v < nvars; ++v) {
      std::vector<int> e = monomials_[i].exponents();
      ++e[v];
      raise_[i * nvars + v] = index_of(MultiIndex(std::move(e)));
    }
  }

  // Exponents never exceed order, so keys add like the monomials they encode.
  for (int i = 0; i < n; ++i) {
    const std::uint64_t ki = key(monomials_[i].exponents());
    for (int j = 0; j < degree_start_[order - degree_[i] + 1]; ++j) {
      const std::uint64_t kk = ki + key(monomials_[j].exponents());
      auto it = std::lower_bound(lookup_.begin(), lookup_.end(),
                                 std::make_pair(kk, std::numeric_limits<int>::min()));
      products_.push_back({i, j, it->second});
    }
  }
  std::sort(products_.begin(), products_.end(),
            [](const Triple& a, const Triple& b) { return a.out < b.out; });
}

std::uint64_t JetLayout::key(const std::vector<int>& e) const {
  std::uint64_t k = 0;
  for (int x : e) k = k * static_cast<std::uint64_t>(order_ + 1) + static_cast<std::uint64_t>(x);
  return k;
}

int JetLayout::index_of(const MultiIndex& k) const {
  if (k.nvars() != nvars_) throw JetError("JetLayout: multi-index length mismatch");
  if (k.order() > order_) return -1;
  const std::uint64_t kk = key(k.exponents());
  auto it = std::lower_bound(lookup_.begin(), lookup_.end(),
                             std::make_pair(kk, std::numeric_limits<int>::min()));
  return it->second;
}

std::shared_ptr<const JetLayout> JetLayout::get(int nvars, int order) {
  if (nvars < 1) throw JetError("JetLayout: nvars must be >= 1");
  if (order < 0) throw JetError("JetLayout: order must be >= 0");
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{nvars, order}];
  if (!slot) slot.reset(new JetLayout(nvars, order));
  return slot;
}

// ---------------------------------------------------------------------------
// Jet

Jet::Jet(LayoutPtr layout) : layout_(std::move(layout)), c_(layout_->size(), 0.0) {}

Jet::Jet(LayoutPtr layout, double constant) : Jet(std::move(layout)) { c_[0] = constant; }

Jet::Jet(int nvars, int order, double constant) : Jet(JetLayout::get(nvars, order), constant) {}

Jet Jet::constant(const JetConfig& cfg, double value) {
  cfg.validate();
  return Jet(cfg.nvars, cfg.order, value);
}

Jet Jet::variable(const JetConfig& cfg, int index, double value) {
  cfg.validate();
  return variable(JetLayout::get(cfg.nvars, cfg.order), index, value);
}

Jet Jet::variable(const LayoutPtr& layout, int index, double value) {
  if (index < 0 || index >= layout->nvars())
    throw JetError("jet_variable: index " + std::to_string(index) + " out of range");
  Jet j(layout, value);
  if (layout->order() >= 1) j.c_[layout->index_of(MultiIndex::unit(layout->nvars(), index))] = 1.0;
  return j;
}

double Jet::coeff(const MultiIndex& k) const {
  const int idx = layout_->index_of(k);
  if (idx < 0) throw JetError("jet_coefficient: |K| = " + std::to_string(k.order()) +
                              " exceeds truncation order " + std::to_string(order()));
  return c_[idx];
}

void Jet::set_coeff(const MultiIndex& k, double v) {
  const int idx = layout_->index_of(k);
  if (idx < 0) throw JetError("Jet::set_coeff: multi-index above truncation order");
  c_[idx] = v;
}

double Jet::derivative(const MultiIndex& k) const { return coeff(k) * k.factorial(); }

bool Jet::is_constant() const {
  return std::all_of(c_.begin() + 1, c_.end(), [](double v) { return v == 0.0; });
}

double Jet::max_abs() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

void require_same(const Jet& a, const Jet& b) {
  if (!a.same_shape(b))
    throw JetError("jet shape mismatch: (" + std::to_string(a.nvars()) + "," +
                   std::to_string(a.order()) + ") vs (" + std::to_string(b.nvars()) + "," +
                   std::to_string(b.order()) + ")");
}

}  // namespace

Jet& Jet::operator+=(const Jet& b) {
  require_same(*this, b);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += b.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& b) {
  require_same(*this, b);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= b.c_[i];
  return *this;
}

Jet& Jet::operator*=(const Jet& b) {
  *this = *this * b;
  return *this;
}

Jet& Jet::operator+=(double s) {
  c_[0] += s;
  return *this;
}

Jet& Jet::operator-=(double s) {
  c_[0] -= s;
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

Jet& Jet::operator/=(double s) {
  for (double& v : c_) v /= s;
  return *this;
}

Jet Jet::operator-() const {
  Jet r(*this);
  for (double& v : r.c_) v = -v;
  return r;
}

void Jet::add_product(const Jet& a, const Jet& b, double scale) {
  require_same(*this, a);
  require_same(a, b);
  if (b.is_constant()) {
    const double s = scale * b.c_[0];
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += s * a.c_[i];
    return;
  }
  if (a.is_constant()) {
    const double s = scale * a.c_[0];
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += s * b.c_[i];
    return;
  }
  const double* pa = a.c_.data();
  const double* pb = b.c_.data();
  double* pc = c_.data();
  if (scale == 1.0) {
    for (const auto& t : layout_->product_table()) pc[t.out] += pa[t.lhs] * pb[t.rhs];
  } else {
    for (const auto& t : layout_->product_table()) pc[t.out] += scale * pa[t.lhs] * pb[t.rhs];
  }
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }

Jet operator*(const Jet& a, const Jet& b) {
  require_same(a, b);
  Jet r(a.layout());
  r.add_product(a, b);
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  if (b.is_constant()) {
    if (b.value() == 0.0) throw JetError("jet division by zero");
    return a / b.value();
  }
  return a * reciprocal(b);
}

Jet operator+(Jet a, double s) { return a += s; }
Jet operator+(double s, Jet a) { return a += s; }
Jet operator-(Jet a, double s) { return a -= s; }
Jet operator-(double s, const Jet& a) { return (-a) += s; }
Jet operator*(Jet a, double s) { return a *= s; }
Jet operator*(double s, Jet a) { return a *= s; }
Jet operator/(Jet a, double s) { return a /= s; }
Jet operator/(double s, const Jet& a) { return reciprocal(a) *= s; }

// ---------------------------------------------------------------------------
// Elementary functions: sum_k d_k (a - a0)^k with the univariate Taylor
// coefficients d_k of f at a0.

Jet apply_series(const Jet& a, std::span<const double> series) {
  const int p = a.order();
  Jet h(a);
  h.coeff_at(0) = 0.0;
  const int top = std::min<int>(p, static_cast<int>(series.size()) - 1);
  Jet r(a.layout(), series[top]);
  for (int k = top - 1; k >= 0; --k) {
    r = r * h;
    r.coeff_at(0) += series[k];
  }
  return r;
}

Jet reciprocal(const Jet& a) {
  const double c = a.value();
  if (c == 0.0) throw JetError("reciprocal of a jet with zero constant term");
  std::vector<double> d(a.order() + 1);
  double v = 1.0 / c;
  for (auto& dk : d) {
    dk = v;
    v *= -1.0 / c;
  }
  return apply_series(a, d);
}

Jet sin(const Jet& a) {
  std::vector<double> d(a.order() + 1);
  double f = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    if (k > 0) f *= k;
    d[k] = std::sin(a.value() + k * std::numbers::pi / 2) / f;
  }
  return apply_series(a, d);
}

Jet cos(const Jet& a) {
  std::vector<double> d(a.order() + 1);
  double f = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    if (k > 0) f *= k;
    d[k] = std::cos(a.value() + k * std::numbers::pi / 2) / f;
  }
  return apply_series(a, d);
}

Jet exp(const Jet& a) {
  std::vector<double> d(a.order() + 1);
  double v = std::exp(a.value());
  for (int k = 0; k <= a.order(); ++k) {
    if (k > 0) v /= k;
    d[k] = v;
  }
  return apply_series(a, d);
}

Jet log(const Jet& a) {
  const double c = a.value();
  if (c <= 0.0) throw JetError("log of a jet with non-positive constant term");
  std::vector<double> d(a.order() + 1);
  d[0] = std::log(c);
  double p = 1.0;
  for (int k = 1; k <= a.order(); ++k) {
    p /= c;
    d[k] = ((k % 2) ? 1.0 : -1.0) * p / k;
  }
  return apply_series(a, d);
}

Jet sqrt(const Jet& a) {
  const double c = a.value();
  if (c <= 0.0) throw JetError("sqrt of a jet with non-positive constant term");
  std::vector<double> d(a.order() + 1);
  double binom = 1.0;
  double v = std::sqrt(c);
  for (int k = 0; k <= a.order(); ++k) {
    d[k] = v * binom;
    binom *= (0.5 - k) / (k + 1);
    v /= c;
  }
  return apply_series(a, d);
}

Jet pow(const Jet& a, int n) {
  if (n < 0) return pow(reciprocal(a), -n);
  Jet result(a.layout(), 1.0);
  Jet base(a);
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Structural operations

Jet differentiate(const Jet& a, int var) {
  if (var < 0 || var >= a.nvars()) throw JetError("differentiate: variable out of range");
  if (a.order() == 0) throw JetError("differentiate: order-0 jet carries no derivative");
  const auto& src = *a.layout();
  Jet r(JetLayout::get(a.nvars(), a.order() - 1));
  for (int i = 0; i < r.size(); ++i) {
    const int up = src.raise(i, var);
    r.coeff_at(i) = (src.monomial(i)[var] + 1) * a.coeff_at(up);
  }
  return r;
}

Jet truncate(const Jet& a, int q) {
  if (q > a.order()) throw JetError("truncate: target order exceeds jet order");
  if (q == a.order()) return a;
  Jet r(JetLayout::get(a.nvars(), q));
  std::copy_n(a.coeffs().begin(), r.size(), r.coeffs().begin());
  return r;
}

Jet extend(const Jet& a, int q) {
  if (q < a.order()) throw JetError("extend: target order below jet order");
  if (q == a.order()) return a;
  Jet r(JetLayout::get(a.nvars(), q));
  std::copy(a.coeffs().begin(), a.coeffs().end(), r.coeffs().begin());
  return r;
}

Jet homogeneous_part(const Jet& a, std::span<const int> vars, int degree) {
  Jet r(a.layout());
  const auto& lay = *a.layout();
  for (int i = 0; i < a.size(); ++i) {
    int d = 0;
    for (int v : vars) d += lay.monomial(i)[v];
    if (d == degree) r.coeff_at(i) = a.coeff_at(i);
  }
  return r;
}

Jet restrict_zero(const Jet& a, std::span<const int> vars) { return homogeneous_part(a, vars, 0); }

double evaluate(const Jet& a, std::span<const double> point) {
  if (static_cast<int>(point.size()) != a.nvars()) throw JetError("evaluate: point dimension mismatch");
  double s = 0.0;
  const auto& lay = *a.layout();
  for (int i = 0; i < a.size(); ++i) {
    double m = a.coeff_at(i);
    if (m == 0.0) continue;
    const auto& mi = lay.monomial(i);
    for (int v = 0; v < a.nvars(); ++v)
      for (int e = 0; e < mi[v]; ++e) m *= point[v];
    s += m;
  }
  return s;
}

Substitution::Substitution(std::span<const Jet> deltas, int outer_order) {
  if (deltas.empty()) throw JetError("jet_compose: no inner jets");
  inner_ = deltas.front().layout();
  for (const auto& d : deltas) {
    if (d.layout() != inner_) throw JetError("jet_compose: inner jets differ in shape");
    if (std::abs(d.value()) > 0.0)
      throw JetError("jet_compose: inner jet has nonzero constant term after recentering");
  }
  const int m = static_cast<int>(deltas.size());
  outer_ = JetLayout::get(m, std::min(outer_order, inner_->order()));
  powers_.reserve(outer_->size());
  powers_.emplace_back(inner_, 1.0);
  for (int idx = 1; idx < outer_->size(); ++idx) {
    const auto& e = outer_->monomial(idx).exponents();
    const int v = static_cast<int>(std::find_if(e.begin(), e.end(), [](int x) { return x > 0; }) - e.begin());
    std::vector<int> parent(e);
    --parent[v];
    const int pidx = outer_->index_of(MultiIndex(std::move(parent)));
    powers_.push_back(powers_[pidx] * deltas[v]);
  }
}

Jet Substitution::apply(const Jet& outer) const {
  if (outer.nvars() != outer_->nvars()) throw JetError("jet_compose: outer variable count mismatch");
  Jet r(inner_);
  const int top = std::min(outer.order(), outer_->order());
  const int n = outer_->degree_end(top);
  auto rc = r.coeffs();
  for (int idx = 0; idx < n; ++idx) {
    const double c = outer.coeff_at(idx);
    if (c == 0.0) continue;
    const auto pc = powers_[idx].coeffs();
    for (std::size_t i = 0; i < rc.size(); ++i) rc[i] += c * pc[i];
  }
  return r;
}

Jet compose(const Jet& outer, std::span<const Jet> inners) {
  if (static_cast<int>(inners.size()) != outer.nvars())
    throw JetError("jet_compose: expected " + std::to_string(outer.nvars()) + " inner jets, got " +
                   std::to_string(inners.size()));
  return Substitution(inners, outer.order()).apply(outer);
}

}  // namespace fermijet
