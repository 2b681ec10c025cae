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

#include "fermijet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fermijet {

std::vector<double> SubmanifoldType::reference_diagonal() const {
  std::vector<double> d;
  d.insert(d.end(), tangent.positive, 1.0);
  d.insert(d.end(), tangent.negative, -1.0);
  d.insert(d.end(), normal.positive, 1.0);
  d.insert(d.end(), normal.negative, -1.0);
  return d;
}

void SubmanifoldType::validate() const {
  if (tangent.positive < 0 || tangent.negative < 0 || normal.positive < 0 || normal.negative < 0)
    throw GeometryError("submanifold type: negative signature count");
  if (k() < 1) throw GeometryError("submanifold type: dimension k must be >= 1");
  if (normal.dim() < 1) throw GeometryError("submanifold type: codimension must be >= 1 (k <= n-1)");
}

Matrix AdaptedFrame::full() const {
  const int n = tangent.rows();
  const int k = tangent.cols();
  Matrix f(n, n);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < k; ++a) f(i, a) = tangent(i, a);
    for (int b = 0; b < n - k; ++b) f(i, k + b) = normal(i, b);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Charts

MetricChart::MetricChart(int dim, Signature signature, Evaluator eval)
    : dim_(dim), signature_(signature), eval_(std::move(eval)) {
  if (dim_ < 1) throw GeometryError("MetricChart: dimension must be >= 1");
  if (signature_.dim() != dim_) throw GeometryError("MetricChart: signature does not match dimension");
}

JetMatrix MetricChart::operator()(std::span<const Jet> point) const {
  if (static_cast<int>(point.size()) != dim_) throw GeometryError("MetricChart: point dimension mismatch");
  JetMatrix g = eval_(point);
  if (g.rows() != dim_ || g.cols() != dim_) throw GeometryError("MetricChart: evaluator returned wrong shape");
  return g;
}

Matrix MetricChart::at(std::span<const double> point) const {
  std::vector<Jet> z;
  z.reserve(point.size());
  for (double v : point) z.emplace_back(dim_, 0, v);
  return (*this)(z).constant();
}

void MetricChart::check_point(std::span<const double> z0) const {
  const Matrix g0 = at(z0);
  const auto ev = symmetric_eigenvalues(g0);
  const double scale = std::max(std::abs(ev.front()), std::abs(ev.back()));
  int pos = 0, neg = 0;
  for (double e : ev) {
    if (std::abs(e) <= 1e-10 * scale) throw GeometryError("metric is degenerate at the probed point");
    (e > 0 ? pos : neg)++;
  }
  if (pos != signature_.positive || neg != signature_.negative)
    throw GeometryError("metric signature (" + std::to_string(pos) + "," + std::to_string(neg) +
                        ") does not match declared (" + std::to_string(signature_.positive) + "," +
                        std::to_string(signature_.negative) + ")");
}

SubmanifoldChart::SubmanifoldChart(int k, int n, Evaluator eval, std::vector<double> base)
    : k_(k), n_(n), eval_(std::move(eval)), base_(std::move(base)) {
  if (k_ < 1 || k_ >= n_) throw GeometryError("SubmanifoldChart: need 1 <= k <= n-1");
  if (static_cast<int>(base_.size()) != k_) throw GeometryError("SubmanifoldChart: base point has wrong dimension");
}

std::vector<Jet> SubmanifoldChart::operator()(std::span<const Jet> s) const {
  if (static_cast<int>(s.size()) != k_) throw GeometryError("SubmanifoldChart: parameter dimension mismatch");
  auto p = eval_(s);
  if (static_cast<int>(p.size()) != n_) throw GeometryError("SubmanifoldChart: evaluator returned wrong dimension");
  return p;
}

std::vector<Jet> SubmanifoldChart::expand(std::span<const double> s0, int order) const {
  const auto lay = JetLayout::get(k_, order);
  std::vector<Jet> s;
  for (int a = 0; a < k_; ++a) s.push_back(Jet::variable(lay, a, s0[a]));
  return (*this)(s);
}

std::vector<double> SubmanifoldChart::at(std::span<const double> s) const {
  std::vector<Jet> js;
  for (double v : s) js.emplace_back(k_, 0, v);
  std::vector<double> out;
  for (const auto& j : (*this)(js)) out.push_back(j.value());
  return out;
}

// ---------------------------------------------------------------------------
// Jet-level building blocks

JetTensor christoffel_from(const JetMatrix& g, const JetMatrix& ginv) {
  const int n = g.rows();
  const int q = g.layout()->order() - 1;
  if (q < 0) throw GeometryError("christoffel: metric jet must have order >= 1");
  const auto lay = JetLayout::get(g.layout()->nvars(), q);
  // dg[l][i][j] = d_l g_ij
  std::vector<Jet> dg;
  dg.reserve(n * n * n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dg.push_back(differentiate(g(i, j), l));
  auto d = [&](int l, int i, int j) -> const Jet& { return dg[(l * n + i) * n + j]; };
  const JetMatrix gi = truncate(ginv, q);

  JetTensor gamma({n, n, n}, lay);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (int l = 0; l < n; ++l) {
        // Gamma_{l,ij} = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
        Jet lowered = d(i, j, l) + d(j, i, l) - d(l, i, j);
        lowered *= 0.5;
        for (int k = 0; k < n; ++k) gamma.at({k, i, j}).add_product(gi(k, l), lowered);
      }
      if (i != j)
        for (int k = 0; k < n; ++k) gamma.at({k, j, i}) = gamma.at({k, i, j});
    }
  }
  return gamma;
}

JetTensor christoffel_from(const JetMatrix& g) {
  const int q = g.layout()->order() - 1;
  if (q < 0) throw GeometryError("christoffel: metric jet must have order >= 1");
  JetMatrix ginv;
  try {
    ginv = inverse(truncate(g, q));
  } catch (const JetError&) {
    throw GeometryError("christoffel: singular constant-term metric");
  }
  return christoffel_from(g, ginv);
}

LocalMetric expand_metric(const MetricChart& g, std::span<const double> z0, int q) {
  const int n = g.dim();
  if (static_cast<int>(z0.size()) != n) throw GeometryError("expand_metric: point dimension mismatch");
  const auto lay = JetLayout::get(n, q + 1);
  std::vector<Jet> z;
  for (int i = 0; i < n; ++i) z.push_back(Jet::variable(lay, i, z0[i]));
  LocalMetric lm;
  lm.g = g(z);
  try {
    lm.ginv = inverse(truncate(lm.g, q));
  } catch (const JetError&) {
    throw GeometryError("metric is singular at the expansion point");
  }
  lm.christoffel = christoffel_from(lm.g, lm.ginv);
  return lm;
}

JetTensor christoffel(const MetricChart& g, std::span<const double> z0, int order) {
  return expand_metric(g, z0, order).christoffel;
}

JetTensor riemann_from(const JetMatrix& g, const JetTensor& gamma) {
  const int n = gamma.shape().dim(0);
  const int q = gamma.order() - 1;
  if (q < 0) throw GeometryError("riemann: insufficient jet order");
  const auto lay = JetLayout::get(gamma.layout()->nvars(), q);
  const JetTensor gm = truncate(gamma, q);
  // dgamma[l] = d_l Gamma^i_{jk}
  std::vector<JetTensor> dgamma;
  for (int l = 0; l < n; ++l) {
    JetTensor t({n, n, n}, lay);
    for (int f = 0; f < t.shape().size(); ++f) t.flat(f) = differentiate(gamma.flat(f), l);
    dgamma.push_back(std::move(t));
  }
  JetTensor up({n, n, n, n}, lay);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          Jet r = dgamma[k].at({i, l, j}) - dgamma[l].at({i, k, j});
          for (int m = 0; m < n; ++m) {
            r.add_product(gm.at({i, k, m}), gm.at({m, l, j}));
            r.add_product(gm.at({i, l, m}), gm.at({m, k, j}), -1.0);
          }
          up.at({i, j, l, k}) = -r;
          up.at({i, j, k, l}) = std::move(r);
        }
  JetTensor down({n, n, n, n}, lay);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Jet& acc = down.at({i, j, k, l});
          for (int m = 0; m < n; ++m) acc.add_product(truncate(g(i, m), q), up.at({m, j, k, l}));
        }
  return down;
}

JetTensor covariant_derivative(const JetTensor& t, const JetTensor& gamma) {
  const int n = gamma.shape().dim(0);
  const int r = t.rank();
  const int q = t.order() - 1;
  if (q < 0) throw GeometryError("covariant derivative: insufficient jet order");
  const auto lay = JetLayout::get(t.layout()->nvars(), q);
  const JetTensor gm = truncate(gamma, q);
  std::vector<int> dims(r + 1, n);
  JetTensor out(dims, lay);
  std::vector<int> src(r);
  for (int f = 0; f < out.shape().size(); ++f) {
    const auto idx = out.shape().unflatten(f);
    const int l = idx[r];
    std::copy_n(idx.begin(), r, src.begin());
    Jet v = differentiate(t.at(src), l);
    for (int s = 0; s < r; ++s) {
      const int keep = src[s];
      for (int p = 0; p < n; ++p) {
        src[s] = p;
        v.add_product(gm.at({p, l, keep}), truncate(t.at(src), q), -1.0);
      }
      src[s] = keep;
    }
    out.flat(f) = std::move(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Operations

std::vector<TensorAtPoint> riemann(const MetricChart& g, std::span<const double> z0, int m) {
  if (m < 0) throw GeometryError("riemann: derivative count must be >= 0");
  const LocalMetric lm = expand_metric(g, z0, m + 1);
  JetTensor t = riemann_from(lm.g, lm.christoffel);
  std::vector<TensorAtPoint> out;
  for (int d = 0; d <= m; ++d) {
    if (d > 0) t = covariant_derivative(t, lm.christoffel);
    out.push_back(t.constant(std::vector<Slot>(4 + d, Slot::kAmbient)));
  }
  return out;
}

namespace {

void check_pullback(const Matrix& g0) {
  const int k = g0.rows();
  const double scale = std::max(g0.max_abs(), 1e-300);
  if (std::abs(determinant(g0)) < 1e-10 * std::pow(scale, k))
    throw GeometryError("degenerate pullback metric on the submanifold");
}

}  // namespace

JetMatrix induced_metric(const MetricChart& g, const SubmanifoldChart& sigma,
                         std::span<const double> s0, int order) {
  if (sigma.n() != g.dim()) throw GeometryError("induced_metric: ambient dimension mismatch");
  const int n = g.dim();
  const int k = sigma.k();
  const auto phi = sigma.expand(s0, order + 1);
  const auto lay = JetLayout::get(k, order);
  JetMatrix dphi(n, k, lay);
  std::vector<Jet> point;
  for (int i = 0; i < n; ++i) {
    point.push_back(truncate(phi[i], order));
    for (int a = 0; a < k; ++a) dphi(i, a) = differentiate(phi[i], a);
  }
  const JetMatrix gphi = g(point);
  JetMatrix induced = dphi.transpose() * gphi * dphi;
  check_pullback(induced.constant());
  return induced;
}

SubmanifoldLocal expand_submanifold(const MetricChart& g, const SubmanifoldChart& sigma,
                                    std::span<const double> s0, int q) {
  if (sigma.n() != g.dim()) throw GeometryError("submanifold/metric dimension mismatch");
  const int n = g.dim();
  const int k = sigma.k();
  SubmanifoldLocal loc;
  loc.q = q;
  loc.phi = sigma.expand(s0, q + 2);
  const auto lay1 = JetLayout::get(k, q + 1);
  const auto lay = JetLayout::get(k, q);

  JetMatrix dphi1(n, k, lay1);
  loc.ddphi = JetTensor({n, k, k}, lay);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < k; ++a) {
      dphi1(i, a) = differentiate(loc.phi[i], a);
      for (int b = 0; b < k; ++b) loc.ddphi.at({i, a, b}) = differentiate(dphi1(i, a), b);
    }
  loc.dphi = truncate(dphi1, q);

  std::vector<Jet> point1;
  std::vector<double> c0(n);
  std::vector<Jet> delta;
  for (int i = 0; i < n; ++i) {
    point1.push_back(truncate(loc.phi[i], q + 1));
    c0[i] = loc.phi[i].value();
    Jet d = truncate(loc.phi[i], q);
    d.coeff_at(0) = 0.0;
    delta.push_back(std::move(d));
  }
  const JetMatrix g1 = g(point1);
  loc.g = truncate(g1, q);
  loc.induced = dphi1.transpose() * g1 * dphi1;
  check_pullback(loc.induced.constant());
  loc.induced_inv = inverse(truncate(loc.induced, q));
  loc.gammabar = christoffel_from(loc.induced, loc.induced_inv);

  const LocalMetric amb = expand_metric(g, c0, q);
  loc.gamma = substitute(amb.christoffel, Substitution(delta, q));

  // P^i_j = delta^i_j - X^i_a G^{ab} X^l_b g_lj
  const JetMatrix xg = loc.dphi.transpose() * loc.g;  // k x n
  const JetMatrix proj_t = loc.dphi * loc.induced_inv * xg;
  loc.normal_projector = JetMatrix(n, n, lay);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) loc.normal_projector(i, j) = Jet(lay, i == j ? 1.0 : 0.0) - proj_t(i, j);
  return loc;
}

JetTensor second_fundamental_vectors(const SubmanifoldLocal& loc) {
  const int n = loc.dphi.rows();
  const int k = loc.dphi.cols();
  const auto& lay = loc.dphi.layout();
  JetTensor acc({n, k, k}, lay);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) {
        Jet v = loc.ddphi.at({i, a, b});
        for (int j = 0; j < n; ++j)
          for (int l = 0; l < n; ++l) {
            const Jet xx = loc.dphi(j, a) * loc.dphi(l, b);
            v.add_product(loc.gamma.at({i, j, l}), xx);
          }
        acc.at({i, a, b}) = std::move(v);
      }
  JetTensor out({n, k, k}, lay);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < k; ++a)
      for (int b = a; b < k; ++b) {
        Jet& v = out.at({i, a, b});
        for (int j = 0; j < n; ++j) v.add_product(loc.normal_projector(i, j), acc.at({j, a, b}));
        out.at({i, b, a}) = v;
      }
  return out;
}

namespace {

/// nablabar along the parameter directions for a tensor whose slots are
/// tangential (parameter components) or a single normal covector slot
/// (ambient components, annihilates T(Sigma)). The new slot is appended.
JetTensor induced_derivative(const JetTensor& t, const std::vector<Slot>& slots,
                             const SubmanifoldLocal& loc) {
  const int n = loc.dphi.rows();
  const int k = loc.dphi.cols();
  const int r = t.rank();
  const int q = t.order() - 1;
  if (q < 0) throw GeometryError("second fundamental form: insufficient jet order");
  const auto lay = JetLayout::get(t.layout()->nvars(), q);
  const JetTensor gbar = truncate(loc.gammabar, q);
  const JetTensor gam = truncate(loc.gamma, q);
  const JetMatrix x = truncate(loc.dphi, q);
  const JetMatrix proj = truncate(loc.normal_projector, q);

  // gx[p][c][j] = Gamma^p_{m j} X^m_c
  JetTensor gx({n, k, n}, lay);
  for (int p = 0; p < n; ++p)
    for (int c = 0; c < k; ++c)
      for (int j = 0; j < n; ++j) {
        Jet& v = gx.at({p, c, j});
        for (int m = 0; m < n; ++m) v.add_product(gam.at({p, m, j}), x(m, c));
      }

  std::vector<int> dims = t.shape().dims();
  dims.push_back(k);
  JetTensor raw(dims, lay);
  std::vector<int> src(r);
  for (int f = 0; f < raw.shape().size(); ++f) {
    const auto idx = raw.shape().unflatten(f);
    const int c = idx[r];
    std::copy_n(idx.begin(), r, src.begin());
    Jet v = differentiate(t.at(src), c);
    for (int s = 0; s < r; ++s) {
      const int keep = src[s];
      if (slots[s] == Slot::kTangential) {
        for (int d = 0; d < k; ++d) {
          src[s] = d;
          v.add_product(gbar.at({d, c, keep}), truncate(t.at(src), q), -1.0);
        }
      } else {
        for (int p = 0; p < n; ++p) {
          src[s] = p;
          v.add_product(gx.at({p, c, keep}), truncate(t.at(src), q), -1.0);
        }
      }
      src[s] = keep;
    }
    raw.flat(f) = std::move(v);
  }

  // Project every normal slot back onto N*(Sigma).
  JetTensor cur = std::move(raw);
  for (int s = 0; s < r; ++s) {
    if (slots[s] != Slot::kNormal) continue;
    JetTensor next(cur.shape().dims(), lay);
    for (int f = 0; f < next.shape().size(); ++f) {
      auto idx = next.shape().unflatten(f);
      const int j = idx[s];
      Jet& v = next.flat(f);
      for (int p = 0; p < n; ++p) {
        idx[s] = p;
        v.add_product(cur.at(idx), proj(p, j));
      }
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

std::vector<TensorAtPoint> second_fundamental_form(const MetricChart& g, const SubmanifoldChart& sigma,
                                                   const AdaptedFrame& frame, int m) {
  if (m < 0) throw GeometryError("second_fundamental_form: derivative count must be >= 0");
  const int n = g.dim();
  const int k = sigma.k();
  const SubmanifoldLocal loc = expand_submanifold(g, sigma, sigma.base(), m);
  const JetTensor vec = second_fundamental_vectors(loc);

  // l_{abj} = g_{ji} L^i_{ab}
  JetTensor t({k, k, n}, loc.dphi.layout());
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      for (int j = 0; j < n; ++j) {
        Jet& v = t.at({a, b, j});
        for (int i = 0; i < n; ++i) v.add_product(loc.g(j, i), vec.at({i, a, b}));
      }

  std::vector<Slot> slots{Slot::kTangential, Slot::kTangential, Slot::kNormal};
  std::vector<TensorAtPoint> out;
  for (int d = 0; d <= m; ++d) {
    if (d > 0) {
      t = induced_derivative(t, slots, loc);
      slots.push_back(Slot::kTangential);
    }
    std::vector<const Matrix*> per_slot;
    for (Slot s : slots) per_slot.push_back(s == Slot::kNormal ? &frame.normal : &frame.tangent_params);
    out.push_back(contract_slots(t.constant(slots), per_slot, slots));
  }
  return out;
}

std::vector<TensorAtPoint> frame_curvature(const MetricChart& g, const SubmanifoldChart& sigma,
                                           const AdaptedFrame& frame, int m) {
  const auto p = sigma.base_point();
  const auto coord = riemann(g, p, m);
  const Matrix f = frame.full();
  std::vector<TensorAtPoint> out;
  for (const auto& t : coord) {
    std::vector<const Matrix*> per_slot(t.rank(), &f);
    out.push_back(contract_slots(t, per_slot, t.labels()));
  }
  return out;
}

double gauss_residual(const MetricChart& g, const SubmanifoldChart& sigma, const AdaptedFrame& frame) {
  const int n = g.dim();
  const int k = sigma.k();
  const SubmanifoldLocal loc = expand_submanifold(g, sigma, sigma.base(), 1);
  const JetTensor rbar = riemann_from(loc.induced, loc.gammabar);
  const JetTensor vec = second_fundamental_vectors(loc);
  const Matrix g0 = loc.g.constant();
  const Matrix x = loc.dphi.constant();
  const TensorAtPoint rm = riemann(g, sigma.base_point(), 0).front();

  TensorAtPoint diff({Slot::kTangential, Slot::kTangential, Slot::kTangential, Slot::kTangential}, {k, k, k, k});
  auto lv = [&](int a, int b) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = vec.at({i, a, b}).value();
    return v;
  };
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      for (int c = 0; c < k; ++c)
        for (int d = 0; d < k; ++d) {
          double proj = 0.0;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              for (int l = 0; l < n; ++l)
                for (int m = 0; m < n; ++m)
                  proj += rm.at({i, j, l, m}) * x(i, a) * x(j, b) * x(l, c) * x(m, d);
          const double ll = bilinear(g0, lv(a, c), lv(b, d)) - bilinear(g0, lv(a, d), lv(b, c));
          diff.at({a, b, c, d}) = rbar.at({a, b, c, d}).value() - proj - ll;
        }
  std::vector<const Matrix*> per_slot(4, &frame.tangent_params);
  return contract_slots(diff, per_slot, diff.labels()).max_abs();
}

// ---------------------------------------------------------------------------
// Adapted frame

namespace {

struct Candidate {
  std::vector<double> amb;     // ambient components
  std::vector<double> params;  // parameter components (tangent block only)
};

struct Accepted {
  Candidate vec;
  double sign;
};

double euclid2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

Candidate project_out(Candidate c, const std::vector<Accepted>& basis, const Matrix& g0) {
  for (const auto& b : basis) {
    const double coef = b.sign * bilinear(g0, c.amb, b.vec.amb);
    for (std::size_t i = 0; i < c.amb.size(); ++i) c.amb[i] -= coef * b.vec.amb[i];
    for (std::size_t i = 0; i < c.params.size(); ++i) c.params[i] -= coef * b.vec.params[i];
  }
  return c;
}

/// Signature-adapted Gram-Schmidt. Candidates are processed in order; a
/// near-null remainder is deferred and retried as sums/differences of pairs.
std::vector<Accepted> gram_schmidt(std::vector<Candidate> cands, std::vector<Accepted> prior, int want,
                                   const Matrix& g0, const char* what) {
  const double gscale = std::max(g0.max_abs(), 1e-300);
  std::vector<Accepted> out;
  std::vector<Candidate> deferred;

  auto try_accept = [&](Candidate c) -> bool {
    std::vector<Accepted> all = prior;
    all.insert(all.end(), out.begin(), out.end());
    c = project_out(std::move(c), all, g0);
    // second pass for stability
    c = project_out(std::move(c), all, g0);
    const double e2 = euclid2(c.amb);
    if (e2 < 1e-20) return false;
    const double norm = bilinear(g0, c.amb, c.amb);
    if (std::abs(norm) < 1e-10 * gscale * e2) {
      deferred.push_back(c);
      return false;
    }
    const double s = 1.0 / std::sqrt(std::abs(norm));
    double flip = 1.0;
    if (norm < 0) {
      for (double v : c.amb)
        if (std::abs(v) > 1e-12) {
          flip = v > 0 ? 1.0 : -1.0;
          break;
        }
    }
    for (double& v : c.amb) v *= s * flip;
    for (double& v : c.params) v *= s * flip;
    out.push_back({std::move(c), norm > 0 ? 1.0 : -1.0});
    return true;
  };

  for (auto& c : cands) {
    if (static_cast<int>(out.size()) == want) break;
    try_accept(std::move(c));
  }
  for (std::size_t i = 0; i < deferred.size() && static_cast<int>(out.size()) < want; ++i) {
    for (std::size_t j = i + 1; j < deferred.size() && static_cast<int>(out.size()) < want; ++j) {
      for (double sgn : {1.0, -1.0}) {
        Candidate c = deferred[i];
        for (std::size_t t = 0; t < c.amb.size(); ++t) c.amb[t] += sgn * deferred[j].amb[t];
        for (std::size_t t = 0; t < c.params.size(); ++t) c.params[t] += sgn * deferred[j].params[t];
        if (try_accept(std::move(c))) break;
      }
    }
  }
  if (static_cast<int>(out.size()) < want)
    throw GeometryError(std::string("adapted_frame: near-null pivot in the ") + what + " block");
  return out;
}

/// Places accepted vectors into the +1 slots then the -1 slots of h.
std::vector<Accepted> order_by_signature(const std::vector<Accepted>& vecs, Signature sig, const char* what) {
  std::vector<Accepted> pos, neg;
  for (const auto& v : vecs) (v.sign > 0 ? pos : neg).push_back(v);
  if (static_cast<int>(pos.size()) != sig.positive || static_cast<int>(neg.size()) != sig.negative)
    throw GeometryError(std::string("adapted_frame: signature mismatch in the ") + what + " block: found (" +
                        std::to_string(pos.size()) + "," + std::to_string(neg.size()) + "), declared (" +
                        std::to_string(sig.positive) + "," + std::to_string(sig.negative) + ")");
  pos.insert(pos.end(), neg.begin(), neg.end());
  return pos;
}

}  // namespace

AdaptedFrame adapted_frame(const MetricChart& g, const SubmanifoldChart& sigma, const SubmanifoldType& type) {
  type.validate();
  const int n = g.dim();
  const int k = sigma.k();
  if (type.n() != n || type.k() != k) throw GeometryError("adapted_frame: type does not match chart dimensions");
  if (!(type.ambient() == g.signature())) throw GeometryError("adapted_frame: type does not match metric signature");

  const auto phi = sigma.expand(sigma.base(), 1);
  std::vector<double> p(n);
  for (int i = 0; i < n; ++i) p[i] = phi[i].value();
  g.check_point(p);
  const Matrix g0 = g.at(p);

  Matrix x(n, k);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < k; ++a) x(i, a) = phi[i].coeff(MultiIndex::unit(k, a));
  check_pullback(x.transpose() * g0 * x);

  std::vector<Candidate> tc;
  for (int a = 0; a < k; ++a) {
    Candidate c{x.column(a), std::vector<double>(k, 0.0)};
    c.params[a] = 1.0;
    tc.push_back(std::move(c));
  }
  const auto tangent = order_by_signature(gram_schmidt(tc, {}, k, g0, "tangential"), type.tangent, "tangential");

  std::vector<Candidate> nc;
  for (int i = 0; i < n; ++i) {
    Candidate c{std::vector<double>(n, 0.0), {}};
    c.amb[i] = 1.0;
    nc.push_back(std::move(c));
  }
  const auto normal = order_by_signature(gram_schmidt(nc, tangent, n - k, g0, "normal"), type.normal, "normal");

  AdaptedFrame f;
  f.type = type;
  f.h = type.reference_form();
  f.tangent = Matrix(n, k);
  f.tangent_params = Matrix(k, k);
  f.normal = Matrix(n, n - k);
  for (int a = 0; a < k; ++a) {
    f.tangent.set_column(a, tangent[a].vec.amb);
    f.tangent_params.set_column(a, tangent[a].vec.params);
  }
  for (int b = 0; b < n - k; ++b) f.normal.set_column(b, normal[b].vec.amb);
  return f;
}

}  // namespace fermijet
