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

#include "fermijet/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace fermijet {

namespace {

std::vector<int> iota_vec(int begin, int end) {
  std::vector<int> v(std::max(0, end - begin));
  std::iota(v.begin(), v.end(), begin);
  return v;
}

// Brings a jet onto the layout (nvars, order). Extending pads with zeros, so
// callers only read degrees the source actually carries.
Jet fit(const Jet& j, int order) { return j.order() >= order ? truncate(j, order) : extend(j, order); }

struct Worst {
  double value = 0.0;
  int component = -1;
  MultiIndex where;

  void scan(const Jet& e, int component_index) {
    const auto& lay = *e.layout();
    for (int i = 0; i < e.size(); ++i) {
      const double v = std::abs(e.coeff_at(i));
      if (component < 0 || v > value) {
        value = v;
        component = component_index;
        where = lay.monomial(i);
      }
    }
  }
};

// Derivative indices of K in ascending order.
std::vector<int> expand_index(const MultiIndex& kk) {
  std::vector<int> out;
  for (int v = 0; v < kk.nvars(); ++v)
    for (int e = 0; e < kk[v]; ++e) out.push_back(v);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Conditions

bool ConditionReport::pass() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const ConditionResult& c) { return c.pass; });
}

const ConditionResult& ConditionReport::operator[](char name) const {
  for (const auto& c : conditions)
    if (c.name == name) return c;
  throw VerifyError(std::string("unknown condition '") + name + "'");
}

ConditionReport check_conditions(const JetMatrix& gt, const Matrix& h, int k, int order, double tol) {
  const int n = gt.rows();
  if (gt.cols() != n || h.rows() != n || h.cols() != n)
    throw VerifyError("check_conditions: metric jet and reference form must be n x n");
  if (k < 1 || k >= n) throw VerifyError("check_conditions: need 0 < k < n");
  if (order < 0) throw VerifyError("check_conditions: order must be >= 0");
  if (gt.layout()->nvars() != n) throw VerifyError("check_conditions: jet variables must be (x, u)");
  if (gt.layout()->order() < order)
    throw VerifyError("check_conditions: metric jet has order " + std::to_string(gt.layout()->order()) +
                      ", need " + std::to_string(order));

  const auto lay = JetLayout::get(n, order);
  const JetMatrix g = truncate(gt, order);
  const int nn = n - k;
  const auto uv = iota_vec(k, n);
  std::vector<Jet> z;
  for (int i = 0; i < n; ++i) z.push_back(Jet::variable(lay, i, 0.0));

  ConditionReport rep;
  rep.order = order;
  rep.tolerance = tol;
  Worst wa, wb, wc, wd;

  for (int a = 0; a < k; ++a) {
    Jet e(lay);
    for (int b = 0; b < k; ++b) e.add_product(restrict_zero(g(a, b), uv) - h(a, b), z[b]);
    wa.scan(e, a);
  }
  for (int a = k; a < n; ++a) {
    Jet e(lay);
    for (int b = k; b < n; ++b) e.add_product(g(a, b) - h(a, b), z[b]);
    wb.scan(e, a);
  }
  for (int ap = k; ap < n; ++ap)
    for (int bp = k; bp < n; ++bp) {
      Jet e(lay);
      for (int a = 0; a < k; ++a) {
        // x^a d_b' g_aa' is exact to `order`: the top coefficients of the
        // derivative are multiplied by x and fall off the layout anyway.
        const Jet d = order > 0 ? restrict_zero(extend(differentiate(g(a, ap), bp), order), uv) : Jet(lay);
        e.add_product(d, z[a]);
      }
      wc.scan(e, (ap - k) * nn + (bp - k));
    }
  for (int a = 0; a < k; ++a) {
    Jet e(lay);
    for (int ap = k; ap < n; ++ap) e.add_product(g(a, ap), z[ap]);
    wd.scan(e, a);
  }

  const std::array<std::pair<char, Worst*>, 4> all = {{{'A', &wa}, {'B', &wb}, {'C', &wc}, {'D', &wd}}};
  for (int c = 0; c < 4; ++c) {
    auto& r = rep.conditions[c];
    r.name = all[c].first;
    r.residual = all[c].second->value;
    r.component = all[c].second->component;
    r.worst = all[c].second->where;
    r.pass = r.residual <= tol;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Symmetrization

double symmetrized(const TensorAtPoint& t, std::vector<int> idx, std::span<const int> positions) {
  if (positions.empty()) return t.at(idx);
  std::vector<int> vals;
  for (int p : positions) {
    if (p < 0 || p >= static_cast<int>(idx.size())) throw VerifyError("symmetrized: position out of range");
    vals.push_back(idx[p]);
  }
  std::sort(vals.begin(), vals.end());
  // Distinct arrangements of a multiset each occur equally often among all
  // permutations, so averaging over them is the full average.
  double sum = 0.0;
  int count = 0;
  do {
    for (std::size_t q = 0; q < positions.size(); ++q) idx[positions[q]] = vals[q];
    sum += t.at(idx);
    ++count;
  } while (std::next_permutation(vals.begin(), vals.end()));
  return sum / count;
}

TensorAtPoint symmetrize(const TensorAtPoint& t, std::span<const int> slots) {
  for (int s : slots) {
    if (s < 0 || s >= t.rank()) throw VerifyError("symmetrize: slot out of range");
    if (t.shape().dim(s) != t.shape().dim(slots[0])) throw VerifyError("symmetrize: slots differ in dimension");
  }
  TensorAtPoint r(t.labels(), t.shape().dims());
  for (int f = 0; f < t.shape().size(); ++f) r.data()[f] = symmetrized(t, t.shape().unflatten(f), slots);
  return r;
}

// ---------------------------------------------------------------------------
// Linear prediction
//
//  row  block     derivative pattern              value
//   1   g_ab      none                            h_ab
//   2   g_ab      c                               0
//   3   g_ab      c1..cM, M >= 2                  2(M-1)/(M+1) R_a(c1 c2|b|,c3..cM)
//   4   g_ab      c1..cM c'                       -2 L_abc',c1..cM
//   5   g_ab      c1..cM c'1..c'N, N >= 2         2 R_a(c'1 c'2|b|,c'3..c'N)c1..cM
//   6   g_ab'     c1..cM                          0
//   7   g_ab'     c'                              0
//   8   g_ab'     c1..cM c', M >= 1               -M/(M+1) R_b'c'a(c1,c2..cM)
//   9   g_ab'     c1..cM c'1..c'N, N >= 2         2N/(N+1) R_a(c'1 c'2|b'|,c'3..c'N)c1..cM
//  10   g_a'b'    none                            h_a'b'
//  11   g_a'b'    c1..cM, M >= 1                  0
//  12   g_a'b'    c1..cM c'                       0
//  13   g_a'b'    c1..cM c'1..c'N, N >= 2         2(N-1)/(N+1) R_a'(c'1 c'2|b'|,c'3..c'N)c1..cM
//
// Derivative indices outside a symmetrization are taken in ascending order.

const char* prediction_row_label(int row) {
  static const char* const labels[] = {
      "",
      "g_ab = h_ab",
      "g_ab,c = 0",
      "g_ab,c1..cM = 2(M-1)/(M+1) R_a(c1c2|b|,c3..cM)",
      "g_ab,c1..cMc' = -2 L_abc',c1..cM",
      "g_ab,c1..cMc'1..c'N = 2 R_a(c'1c'2|b|,c'3..c'N)c1..cM",
      "g_ab',c1..cM = 0",
      "g_ab',c' = 0",
      "g_ab',c1..cMc' = -M/(M+1) R_b'c'a(c1,c2..cM)",
      "g_ab',c1..cMc'1..c'N = 2N/(N+1) R_a(c'1c'2|b'|,c'3..c'N)c1..cM",
      "g_a'b' = h_a'b'",
      "g_a'b',c1..cM = 0",
      "g_a'b',c1..cMc' = 0",
      "g_a'b',c1..cMc'1..c'N = 2(N-1)/(N+1) R_a'(c'1c'2|b'|,c'3..c'N)c1..cM",
  };
  return row >= 1 && row <= 13 ? labels[row] : "";
}

const PredictionEntry* LinearPrediction::find(int i, int j, const MultiIndex& kk) const {
  if (i > j) std::swap(i, j);
  for (const auto& e : entries)
    if (e.i == i && e.j == j && e.k == kk) return &e;
  return nullptr;
}

namespace {

// R_{i c'1 c'2 j ; c'3..c'N c1..cM} symmetrized over (c'1, c'2, c'3..c'N).
double normal_block_term(const TensorAtPoint& r, int i, int j, const std::vector<int>& tan,
                         const std::vector<int>& nor) {
  std::vector<int> idx = {i, nor[0], nor[1], j};
  for (std::size_t q = 2; q < nor.size(); ++q) idx.push_back(nor[q]);
  for (int t : tan) idx.push_back(t);
  std::vector<int> pos = {1, 2};
  for (int q = 4; q < 2 + static_cast<int>(nor.size()); ++q) pos.push_back(q);
  return symmetrized(r, idx, pos);
}

}  // namespace

LinearPrediction predict_linear_jet(std::span<const TensorAtPoint> curv, std::span<const TensorAtPoint> fund,
                                    const Matrix& h, int k, int order) {
  const int n = h.rows();
  if (h.cols() != n) throw VerifyError("predict_linear_jet: reference form must be square");
  if (k < 1 || k >= n) throw VerifyError("predict_linear_jet: need 0 < k < n");
  if (order < 0) throw VerifyError("predict_linear_jet: order must be >= 0");
  if (order >= 2 && static_cast<int>(curv.size()) < order - 1)
    throw VerifyError("predict_linear_jet: curvature derivatives up to " + std::to_string(order - 2) +
                      " required, got " + std::to_string(static_cast<int>(curv.size()) - 1));
  if (order >= 1 && static_cast<int>(fund.size()) < order)
    throw VerifyError("predict_linear_jet: second fundamental form derivatives up to " +
                      std::to_string(order - 1) + " required, got " + std::to_string(static_cast<int>(fund.size()) - 1));
  for (std::size_t m = 0; m < curv.size() && static_cast<int>(m) + 2 <= order; ++m)
    if (curv[m].rank() != 4 + static_cast<int>(m) || curv[m].shape().dim(0) != n)
      throw VerifyError("predict_linear_jet: curvature tensor " + std::to_string(m) + " has the wrong shape");
  for (std::size_t m = 0; m < fund.size() && static_cast<int>(m) + 1 <= order; ++m)
    if (fund[m].rank() != 3 + static_cast<int>(m) || fund[m].shape().dim(0) != k ||
        fund[m].shape().dim(2) != n - k)
      throw VerifyError("predict_linear_jet: second fundamental form " + std::to_string(m) + " has the wrong shape");

  LinearPrediction out;
  out.n = n;
  out.k = k;
  out.order = order;
  const auto lay = JetLayout::get(n, order);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int idx = 0; idx < lay->size(); ++idx) {
        const MultiIndex& kk = lay->monomial(idx);
        const auto d = expand_index(kk);
        std::vector<int> tan, nor;
        for (int v : d) (v < k ? tan : nor).push_back(v);
        const int m = static_cast<int>(tan.size());
        const int nn = static_cast<int>(nor.size());
        const int total = m + nn;
        PredictionEntry e{i, j, kk, 0.0, 0};
        if (j < k) {
          if (total == 0) {
            e.row = 1;
            e.value = h(i, j);
          } else if (nn == 0 && m == 1) {
            e.row = 2;
          } else if (nn == 0) {
            e.row = 3;
            std::vector<int> ix = {i, tan[0], tan[1], j};
            for (int q = 2; q < m; ++q) ix.push_back(tan[q]);
            std::vector<int> pos = {1, 2};
            for (int q = 4; q < m + 2; ++q) pos.push_back(q);
            e.value = 2.0 * (m - 1) / (m + 1) * symmetrized(curv[m - 2], ix, pos);
          } else if (nn == 1) {
            e.row = 4;
            std::vector<int> ix = {i, j, nor[0] - k};
            for (int t : tan) ix.push_back(t);
            e.value = -2.0 * fund[m].at(ix);
          } else {
            e.row = 5;
            e.value = 2.0 * normal_block_term(curv[total - 2], i, j, tan, nor);
          }
        } else if (i < k) {
          if (nn == 0) {
            e.row = 6;
          } else if (nn == 1 && m == 0) {
            e.row = 7;
          } else if (nn == 1) {
            e.row = 8;
            std::vector<int> ix = {j, nor[0], i};
            for (int t : tan) ix.push_back(t);
            const auto pos = iota_vec(3, m + 3);
            e.value = -static_cast<double>(m) / (m + 1) * symmetrized(curv[m - 1], ix, pos);
          } else {
            e.row = 9;
            e.value = 2.0 * nn / (nn + 1) * normal_block_term(curv[total - 2], i, j, tan, nor);
          }
        } else {
          if (total == 0) {
            e.row = 10;
            e.value = h(i, j);
          } else if (nn == 0) {
            e.row = 11;
          } else if (nn == 1) {
            e.row = 12;
          } else {
            e.row = 13;
            e.value = 2.0 * (nn - 1) / (nn + 1) * normal_block_term(curv[total - 2], i, j, tan, nor);
          }
        }
        out.entries.push_back(std::move(e));
      }
  return out;
}

// ---------------------------------------------------------------------------
// Comparisons

bool ComparisonReport::pass() const {
  if (!std::all_of(entries.begin(), entries.end(), [](const ComparisonEntry& e) { return e.pass; })) return false;
  return !fitted_exponent || *fitted_exponent >= min_exponent;
}

double ComparisonReport::max_abs_dev() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.abs_dev);
  return m;
}

double relative_deviation(double measured, double predicted) {
  return std::abs(measured - predicted) / std::max({std::abs(measured), std::abs(predicted), kRelativeFloor});
}

ComparisonReport compare_first_order(const JetMatrix& measured, const LinearPrediction& pred, double tol) {
  if (measured.rows() != pred.n || measured.cols() != pred.n)
    throw VerifyError("compare_first_order: measured jet and prediction differ in dimension");
  if (measured.layout()->order() < 1 || pred.order < 1)
    throw VerifyError("compare_first_order: need jets of order >= 1");
  ComparisonReport rep;
  for (const auto& p : pred.entries) {
    if (p.k.order() != 1) continue;
    ComparisonEntry e;
    e.i = p.i;
    e.j = p.j;
    e.k = p.k;
    e.row = p.row;
    e.measured = measured(p.i, p.j).derivative(p.k);
    e.predicted = p.value;
    e.abs_dev = std::abs(e.measured - e.predicted);
    e.rel_dev = relative_deviation(e.measured, e.predicted);
    e.tolerance = tol;
    e.pass = e.abs_dev <= tol;
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

MemberData measure_member(const CaseGeometry& c, int order, const FermiOptions& opts) {
  const AdaptedFrame frame = adapted_frame(c.metric, c.submanifold, c.type);
  const FermiChart chart(c.metric, c.submanifold, frame, opts);
  MemberData d;
  d.measured = fermi_metric_jet(chart, order);
  const auto curv = frame_curvature(c.metric, c.submanifold, frame, std::max(order - 2, 0));
  const auto fund = second_fundamental_form(c.metric, c.submanifold, frame, std::max(order - 1, 0));
  d.prediction = predict_linear_jet(curv, fund, frame.h, c.type.k(), order);
  return d;
}

ComparisonReport linearized_compare(const Family& family, const LinearizeOptions& opts) {
  if (!family) throw VerifyError("linearized_compare: empty family");
  if (!(opts.eps > 0.0)) throw VerifyError("linearized_compare: eps must be positive");
  if (opts.min_order < 0 || opts.min_order > opts.order)
    throw VerifyError("linearized_compare: need 0 <= min_order <= order");
  for (double e : opts.scaling_eps)
    if (!(e > 0.0)) throw VerifyError("linearized_compare: scaling eps must be positive");

  auto selected = [&](const MultiIndex& kk) { return kk.order() >= opts.min_order && kk.order() <= opts.order; };
  auto member = [&](double e) { return measure_member(family(e), opts.order, opts.fermi); };

  const double eps = opts.eps;
  const std::array<double, 4> steps = {-2 * eps, -eps, eps, 2 * eps};
  std::array<MemberData, 4> mem;
  for (int s = 0; s < 4; ++s) mem[s] = member(steps[s]);

  ComparisonReport rep;
  rep.eps_used.assign(steps.begin(), steps.end());
  rep.min_exponent = opts.min_exponent;
  // Fourth-order central difference: (8 (f(e) - f(-e)) - (f(2e) - f(-2e))) / 12e.
  auto slope = [&](double fm2, double fm1, double f1, double f2) { return (8 * (f1 - fm1) - (f2 - fm2)) / (12 * eps); };
  const auto& ref = mem[2].prediction;
  for (std::size_t q = 0; q < ref.entries.size(); ++q) {
    const auto& p = ref.entries[q];
    if (!selected(p.k)) continue;
    double ms[4], ps[4];
    for (int s = 0; s < 4; ++s) {
      ms[s] = mem[s].measured(p.i, p.j).derivative(p.k);
      ps[s] = mem[s].prediction.entries[q].value;
    }
    ComparisonEntry e;
    e.i = p.i;
    e.j = p.j;
    e.k = p.k;
    e.row = p.row;
    e.measured = slope(ms[0], ms[1], ms[2], ms[3]);
    e.predicted = slope(ps[0], ps[1], ps[2], ps[3]);
    e.abs_dev = std::abs(e.measured - e.predicted);
    e.rel_dev = relative_deviation(e.measured, e.predicted);
    e.tolerance = opts.rel_tol;
    e.pass = e.rel_dev <= opts.rel_tol ||
             (std::abs(e.measured) <= opts.abs_floor && std::abs(e.predicted) <= opts.abs_floor);
    rep.entries.push_back(std::move(e));
  }

  if (!opts.scaling_eps.empty()) {
    std::vector<double> lx, ly;
    for (double e : opts.scaling_eps) {
      const auto d = member(e);
      double dev = 0.0;
      for (const auto& p : d.prediction.entries)
        if (selected(p.k)) dev = std::max(dev, std::abs(d.measured(p.i, p.j).derivative(p.k) - p.value));
      rep.scaling_eps.push_back(e);
      rep.scaling_deviation.push_back(dev);
      if (dev > 0.0) {
        lx.push_back(std::log(e));
        ly.push_back(std::log(dev));
      }
    }
    if (lx.size() < rep.scaling_eps.size()) {
      // A vanishing deviation at some eps: nonlinear terms are absent.
      rep.fitted_exponent = std::numeric_limits<double>::infinity();
    } else if (lx.size() >= 2) {
      const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
      const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t q = 0; q < lx.size(); ++q) {
        sxy += (lx[q] - mx) * (ly[q] - my);
        sxx += (lx[q] - mx) * (lx[q] - mx);
      }
      if (sxx > 0.0) rep.fitted_exponent = sxy / sxx;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Frame coefficients

namespace {

std::vector<Jet> recenter(std::span<const Jet> z) {
  std::vector<Jet> d(z.begin(), z.end());
  for (auto& j : d) j.coeff_at(0) = 0.0;
  return d;
}

std::vector<double> constant_terms(std::span<const Jet> z) {
  std::vector<double> c;
  for (const auto& j : z) c.push_back(j.value());
  return c;
}

}  // namespace

FermiTensorJets fermi_tensor_jets(const FermiChart& chart, int order) {
  if (order < 0) throw VerifyError("fermi_tensor_jets: order must be >= 0");
  const int n = chart.n();
  const int k = chart.k();
  const int nn = n - k;
  const int rq = std::max(order - 2, 0);
  const int lq = std::max(order - 1, 0);
  const auto phi_full = chart.expansion(lq + 2);
  const auto base = constant_terms(phi_full);
  const auto uv = iota_vec(k, n);

  FermiTensorJets out;

  // Rm~_{abcd} = Rm_{pqrs}(Phi) d_a Phi^p d_b Phi^q d_c Phi^r d_d Phi^s.
  {
    std::vector<Jet> phi;
    for (const auto& p : phi_full) phi.push_back(truncate(p, rq + 1));
    const auto lay = JetLayout::get(n, rq);
    JetMatrix dphi(n, n, lay);
    std::vector<Jet> point;
    for (int i = 0; i < n; ++i) {
      point.push_back(truncate(phi[i], rq));
      for (int a = 0; a < n; ++a) dphi(i, a) = differentiate(phi[i], a);
    }
    const LocalMetric lm = expand_metric(chart.metric(), base, rq + 1);
    const JetTensor ramb = riemann_from(lm.g, lm.christoffel);
    JetTensor cur = substitute(truncate(ramb, rq), Substitution(recenter(point), rq));
    // Pull back one slot at a time.
    for (int slot = 0; slot < 4; ++slot) {
      JetTensor next({n, n, n, n}, lay);
      for (int f = 0; f < next.shape().size(); ++f) {
        auto idx = next.shape().unflatten(f);
        const int a = idx[slot];
        Jet acc(lay);
        for (int p = 0; p < n; ++p) {
          idx[slot] = p;
          acc.add_product(cur.at(idx), dphi(p, a));
        }
        next.flat(f) = std::move(acc);
      }
      cur = std::move(next);
    }
    out.riemann = std::move(cur);
  }

  // L^{a'}_{ab}(x) = h^{a'b'} g(nabla_a d_b, d_b') on u = 0.
  {
    std::vector<Jet> phi(phi_full.begin(), phi_full.end());
    const auto lay = JetLayout::get(n, lq);
    std::vector<Jet> point;
    for (int i = 0; i < n; ++i) point.push_back(truncate(phi[i], lq));
    JetMatrix dphi(n, n, lay);
    JetTensor ddphi({n, n, n}, lay);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a) {
        const Jet d = differentiate(phi[i], a);
        dphi(i, a) = truncate(d, lq);
        for (int b = 0; b < n; ++b) ddphi.at({i, a, b}) = differentiate(d, b);
      }
    const JetMatrix g = chart.metric()(point);
    const LocalMetric lm = expand_metric(chart.metric(), base, lq);
    const JetTensor gam = substitute(lm.christoffel, Substitution(recenter(point), lq));
    const Matrix& h = chart.frame().h;
    const Matrix hinv = inverse(h);

    out.lvec = JetTensor({nn, k, k}, lay);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        std::vector<Jet> acc;
        for (int i = 0; i < n; ++i) {
          Jet v = ddphi.at({i, a, b});
          for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q) v.add_product(gam.at({i, p, q}), dphi(p, a) * dphi(q, b));
          acc.push_back(std::move(v));
        }
        std::vector<Jet> low(nn, Jet(lay));
        for (int bp = 0; bp < nn; ++bp)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) low[bp].add_product(g(i, j) * acc[i], dphi(j, k + bp));
        for (int ap = 0; ap < nn; ++ap) {
          Jet v(lay);
          for (int bp = 0; bp < nn; ++bp) v += hinv(k + ap, k + bp) * low[bp];
          out.lvec.at({ap, a, b}) = restrict_zero(v, uv);
        }
      }
  }
  return out;
}

FrameCoefficientJet solve_frame_coefficients(const FermiTensorJets& t, const Matrix& h, int k, int order) {
  const int n = h.rows();
  if (h.cols() != n) throw VerifyError("solve_frame_coefficients: reference form must be square");
  if (k < 1 || k >= n) throw VerifyError("solve_frame_coefficients: need 0 < k < n");
  if (order < 0 || order > 3) throw VerifyError("solve_frame_coefficients: order must be in [0, 3]");
  const int nn = n - k;
  if (t.riemann.shape().dims() != std::vector<int>{n, n, n, n})
    throw VerifyError("solve_frame_coefficients: curvature jet must be n x n x n x n");
  if (t.lvec.shape().dims() != std::vector<int>{nn, k, k})
    throw VerifyError("solve_frame_coefficients: second fundamental form jet must be (n-k) x k x k");
  if (t.riemann.layout()->nvars() != n || t.lvec.layout()->nvars() != n)
    throw VerifyError("solve_frame_coefficients: jets must be in the n variables (x, u)");
  if (order >= 2 && t.riemann.order() < order - 2)
    throw VerifyError("solve_frame_coefficients: curvature jet needs order >= " + std::to_string(order - 2));
  if (order >= 1 && t.lvec.order() < order - 1)
    throw VerifyError("solve_frame_coefficients: second fundamental form jet needs order >= " +
                      std::to_string(order - 1));

  const auto lay = JetLayout::get(n, order);
  const auto xv = iota_vec(0, k);
  const auto uv = iota_vec(k, n);
  auto part = [&](const Jet& j, int m, int nd) { return homogeneous_part(homogeneous_part(j, xv, m), uv, nd); };
  std::vector<Jet> z;
  for (int i = 0; i < n; ++i) z.push_back(Jet::variable(lay, i, 0.0));
  const Matrix hinv = inverse(h);

  JetTensor rm({n, n, n, n}, lay);
  JetTensor rm0({n, n, n, n}, lay);
  for (int f = 0; f < rm.shape().size(); ++f) {
    rm.flat(f) = fit(t.riemann.flat(f), order);
    rm0.flat(f) = restrict_zero(rm.flat(f), uv);
  }
  JetTensor lv({nn, k, k}, lay);
  for (int f = 0; f < lv.shape().size(); ++f) lv.flat(f) = restrict_zero(fit(t.lvec.flat(f), order), uv);

  JetMatrix a(n, n, lay);
  for (int i = 0; i < n; ++i) a(i, i) = Jet(lay, 1.0);
  auto tangential_block = [&] {
    JetMatrix b(k, k, lay);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) b(i, j) = restrict_zero(a(i, j), uv);
    return b;
  };

  // N = 0: (X^2 + X) a^a_b = a^a_c (a^-1)^d_r Rbar^c_{dsb} x^s x^r on Sigma,
  // with a^a_c Rbar^c_{d..} = h^{ap} (a^-1)^e_p Rbar_{ed..} and Rbar from Gauss.
  JetTensor rbar({k, k, k, k}, lay);
  for (int e = 0; e < k; ++e)
    for (int d = 0; d < k; ++d)
      for (int s = 0; s < k; ++s)
        for (int b = 0; b < k; ++b) {
          Jet v = rm0.at({e, d, s, b});
          for (int ap = 0; ap < nn; ++ap)
            for (int bp = 0; bp < nn; ++bp) {
              const double w = h(k + ap, k + bp);
              if (w == 0.0) continue;
              v.add_product(lv.at({ap, e, s}), lv.at({bp, d, b}), w);
              v.add_product(lv.at({ap, e, b}), lv.at({bp, d, s}), -w);
            }
          rbar.at({e, d, s, b}) = std::move(v);
        }
  for (int m = 2; m <= order; ++m) {
    const JetMatrix ti = inverse(tangential_block());
    // q_{e b} = (a^-1)^d_r Rbar_{edsb} x^s x^r
    JetMatrix q(k, k, lay);
    for (int e = 0; e < k; ++e)
      for (int b = 0; b < k; ++b)
        for (int d = 0; d < k; ++d)
          for (int s = 0; s < k; ++s)
            for (int r = 0; r < k; ++r) q(e, b).add_product(ti(d, r) * rbar.at({e, d, s, b}), z[s] * z[r]);
    for (int al = 0; al < k; ++al)
      for (int b = 0; b < k; ++b) {
        Jet rhs(lay);
        for (int p = 0; p < k; ++p)
          for (int e = 0; e < k; ++e) {
            if (hinv(al, p) == 0.0) continue;
            rhs.add_product(ti(e, p), q(e, b), hinv(al, p));
          }
        a(al, b) += part(rhs, m, 0) / double(m * m + m);
      }
  }

  if (order >= 1) {
    const JetMatrix ti = inverse(tangential_block());
    // N = 1, a^a_b: d_a' a^a_b = -h^{ac} h_{a'b'} L^{b'}_{bd} (a^-1)^d_c on Sigma.
    for (int al = 0; al < k; ++al)
      for (int b = 0; b < k; ++b) {
        Jet add(lay);
        for (int ap = 0; ap < nn; ++ap) {
          Jet d(lay);
          for (int c = 0; c < k; ++c)
            for (int bp = 0; bp < nn; ++bp) {
              const double w = hinv(al, c) * h(k + ap, k + bp);
              if (w == 0.0) continue;
              for (int dd = 0; dd < k; ++dd) d.add_product(lv.at({bp, b, dd}), ti(dd, c), -w);
            }
          add.add_product(z[k + ap], d);
        }
        a(al, b) += add;
      }
    // N = 1, a^{a'}_b: (X + 1)(d_b' a^{a'}_b) = R^{a'}_{b'cb} x^c
    //   + h^{gd} h_{b'c'} (L^{a'}_{rc} L^{c'}_{bs} - L^{a'}_{rb} L^{c'}_{cs}) (a^-1)^r_g (a^-1)^s_d x^c.
    for (int ap = 0; ap < nn; ++ap)
      for (int b = 0; b < k; ++b) {
        Jet add(lay);
        for (int bp = 0; bp < nn; ++bp) {
          Jet f(lay);
          for (int c = 0; c < k; ++c) {
            Jet coef(lay);
            for (int mp = 0; mp < nn; ++mp)
              if (hinv(k + ap, k + mp) != 0.0) coef += hinv(k + ap, k + mp) * rm0.at({k + mp, k + bp, c, b});
            for (int cp = 0; cp < nn; ++cp) {
              if (h(k + bp, k + cp) == 0.0) continue;
              for (int g = 0; g < k; ++g)
                for (int dd = 0; dd < k; ++dd) {
                  const double w = hinv(g, dd) * h(k + bp, k + cp);
                  if (w == 0.0) continue;
                  for (int r = 0; r < k; ++r)
                    for (int s = 0; s < k; ++s) {
                      const Jet ll = lv.at({ap, r, c}) * lv.at({cp, b, s}) - lv.at({ap, r, b}) * lv.at({cp, c, s});
                      coef.add_product(ll, ti(r, g) * ti(s, dd), w);
                    }
                }
            }
            f.add_product(coef, z[c]);
          }
          Jet sol(lay);
          for (int m = 1; m < order; ++m) sol += part(f, m, 0) / double(m + 1);
          add.add_product(z[k + bp], sol);
        }
        a(k + ap, b) += add;
      }
  }

  // N >= 2: (U^2 -+ U) a^i_j = a^i_r (a^-1)^s_c' R^r_{s a' j} u^a' u^c'
  //   with a^i_r R^r_{s..} = h^{ip} (a^-1)^m_p R_{ms..}.
  for (int nd = 2; nd <= order; ++nd) {
    const JetMatrix ai = inverse(a);
    JetMatrix tmat(n, n, lay);  // T_{mj} = (a^-1)^s_c' R_{m s a' j} u^a' u^c'
    for (int mm = 0; mm < n; ++mm)
      for (int j = 0; j < n; ++j)
        for (int s = 0; s < n; ++s)
          for (int cp = 0; cp < nn; ++cp) {
            Jet v(lay);
            for (int ap = 0; ap < nn; ++ap) v.add_product(rm.at({mm, s, k + ap, j}), z[k + ap]);
            tmat(mm, j).add_product(ai(s, k + cp) * v, z[k + cp]);
          }
    JetMatrix upd(n, n, lay);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Jet rhs(lay);
        for (int p = 0; p < n; ++p) {
          if (hinv(i, p) == 0.0) continue;
          for (int mm = 0; mm < n; ++mm) rhs.add_product(ai(mm, p), tmat(mm, j), hinv(i, p));
        }
        const double lam = j < k ? nd * nd - nd : nd * nd + nd;
        upd(i, j) = homogeneous_part(rhs, uv, nd) / lam;
      }
    a = a + upd;
  }

  return FrameCoefficientJet{std::move(a), h, k};
}

JetMatrix reassemble_metric_jet(const FrameCoefficientJet& f) {
  return f.a.transpose() * lift(f.h, f.a.layout()) * f.a;
}

double max_derivative_deviation(const JetMatrix& a, const JetMatrix& b, int order) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw VerifyError("max_derivative_deviation: shape mismatch");
  if (a.layout()->order() < order || b.layout()->order() < order || a.layout()->nvars() != b.layout()->nvars())
    throw VerifyError("max_derivative_deviation: jets do not cover the requested order");
  const auto lay = JetLayout::get(a.layout()->nvars(), order);
  double m = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const Jet x = truncate(a(i, j), order);
      const Jet y = truncate(b(i, j), order);
      for (int q = 0; q < lay->size(); ++q)
        m = std::max(m, std::abs(x.coeff_at(q) - y.coeff_at(q)) * lay->factorial(q));
    }
  return m;
}

}  // namespace fermijet
