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

#include "fermijet/fermi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace fermijet {

void GeodesicSolverConfig::validate() const {
  if (steps_per_unit < 8) throw CoordsError("solver: steps_per_unit must be >= 8");
  if (!(tolerance > 0)) throw CoordsError("solver: tolerance must be > 0");
  if (max_steps < steps_per_unit) throw CoordsError("solver: max_steps must be >= steps_per_unit");
}

namespace {

using State = std::vector<Jet>;
using Rhs = std::function<State(const State&)>;

State axpy(const State& y, double h, const State& k) {
  State r = y;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += h * k[i];
  return r;
}

State rk4(const Rhs& f, State y, int steps, double t_end) {
  const double h = t_end / steps;
  for (int s = 0; s < steps; ++s) {
    const State k1 = f(y);
    const State k2 = f(axpy(y, 0.5 * h, k1));
    const State k3 = f(axpy(y, 0.5 * h, k2));
    const State k4 = f(axpy(y, h, k3));
    for (std::size_t i = 0; i < y.size(); ++i) {
      Jet incr = k1[i] + k4[i];
      incr += 2.0 * (k2[i] + k3[i]);
      incr *= h / 6.0;
      y[i] += incr;
    }
  }
  return y;
}

double state_diff(const State& a, const State& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, (a[i] - b[i]).max_abs());
  return d;
}

double state_scale(const State& a) {
  double s = 1.0;
  for (const auto& j : a) s = std::max(s, j.max_abs());
  return s;
}

State integrate(const Rhs& f, const State& y0, double t_end, double speed, const GeodesicSolverConfig& cfg) {
  cfg.validate();
  int steps = std::max(cfg.steps_per_unit,
                       static_cast<int>(std::ceil(cfg.steps_per_unit * std::abs(t_end) * std::max(1.0, speed))));
  if (steps > cfg.max_steps) throw CoordsError("geodesic integration: step budget exhausted");
  State coarse = rk4(f, y0, steps, t_end);
  if (!cfg.halving_check) return coarse;
  for (;;) {
    if (2 * steps > cfg.max_steps)
      throw CoordsError("geodesic integration: step budget of " + std::to_string(cfg.max_steps) +
                        " exhausted before the halving check met tolerance");
    State fine = rk4(f, y0, 2 * steps, t_end);
    if (state_diff(coarse, fine) <= cfg.tolerance * state_scale(fine)) return fine;
    coarse = std::move(fine);
    steps *= 2;
  }
}

std::vector<double> constants(std::span<const Jet> v) {
  std::vector<double> c(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) c[i] = v[i].value();
  return c;
}

std::vector<Jet> deltas(std::span<const Jet> v) {
  std::vector<Jet> d(v.begin(), v.end());
  for (auto& j : d) j.coeff_at(0) = 0.0;
  return d;
}

double euclid(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Remembers expansions about recently visited real points. Along a seeded
/// flow from the origin the constant part never moves, so one entry serves
/// every stage.
template <class T>
class PointCache {
 public:
  explicit PointCache(std::function<T(const std::vector<double>&)> make) : make_(std::move(make)) {}

  const T& get(const std::vector<double>& p) {
    for (const auto& e : entries_)
      if (e.first == p) return e.second;
    if (entries_.size() >= 4) entries_.erase(entries_.begin());
    entries_.emplace_back(p, make_(p));
    return entries_.back().second;
  }

 private:
  std::function<T(const std::vector<double>&)> make_;
  std::vector<std::pair<std::vector<double>, T>> entries_;
};

void require_common_layout(std::span<const Jet> a, std::span<const Jet> b, const char* what) {
  if (a.empty()) throw CoordsError(std::string(what) + ": empty argument");
  for (const auto& j : a)
    if (!j.same_shape(a[0])) throw CoordsError(std::string(what) + ": arguments must share a jet layout");
  for (const auto& j : b)
    if (!j.same_shape(a[0])) throw CoordsError(std::string(what) + ": arguments must share a jet layout");
}

// ---------------------------------------------------------------------------
// Radial geodesic on Sigma, optionally carrying normal vectors.

struct SubmanifoldAt {
  JetTensor gammabar;   // [c][a][b]
  JetMatrix dphi;       // n x k
  JetTensor ddphi;      // [i][a][b]
  JetTensor gamma;      // [i][j][l]
  JetMatrix g;
  JetMatrix induced_inv;
  JetMatrix projector;
  std::vector<Jet> phi;
};

SubmanifoldAt evaluate_on(const SubmanifoldLocal& loc, std::span<const Jet> s) {
  const int q = s[0].order();
  const Substitution sub(deltas(s), q);
  auto sm = [&](const JetMatrix& m) {
    JetMatrix r(m.rows(), m.cols(), s[0].layout());
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) r(i, j) = sub.apply(m(i, j));
    return r;
  };
  SubmanifoldAt at;
  at.gammabar = substitute(truncate(loc.gammabar, q), sub);
  at.dphi = sm(truncate(loc.dphi, q));
  at.ddphi = substitute(truncate(loc.ddphi, q), sub);
  at.gamma = substitute(truncate(loc.gamma, q), sub);
  at.g = sm(truncate(loc.g, q));
  at.induced_inv = sm(truncate(loc.induced_inv, q));
  at.projector = sm(truncate(loc.normal_projector, q));
  for (const auto& p : loc.phi) at.phi.push_back(sub.apply(truncate(p, q)));
  return at;
}

struct RadialResult {
  std::vector<Jet> s;
  std::vector<std::vector<Jet>> normals;
};

RadialResult radial_flow(const MetricChart& g, const SubmanifoldChart& sigma, const AdaptedFrame& frame,
                         std::span<const Jet> x, const GeodesicSolverConfig& cfg, bool carry_normals) {
  const int k = sigma.k();
  const int n = sigma.n();
  if (k >= n) throw CoordsError("intrinsic_exp: submanifold must have k <= n-1");
  if (static_cast<int>(x.size()) != k) throw CoordsError("intrinsic_exp: x has the wrong dimension");
  require_common_layout(x, {}, "intrinsic_exp");
  const auto lay = x[0].layout();
  const int q = lay->order();
  const int m = carry_normals ? n - k : 0;

  PointCache<SubmanifoldLocal> cache(
      [&](const std::vector<double>& s0) { return expand_submanifold(g, sigma, s0, q); });

  // state: s (k), sdot (k), normals (m blocks of n)
  State y0;
  for (int a = 0; a < k; ++a) y0.emplace_back(lay, sigma.base()[a]);
  std::vector<double> v0c(k, 0.0);
  for (int a = 0; a < k; ++a) {
    Jet v(lay);
    for (int b = 0; b < k; ++b) v.add_product(Jet(lay, frame.tangent_params(a, b)), x[b]);
    v0c[a] = v.value();
    y0.push_back(std::move(v));
  }
  for (int b = 0; b < m; ++b)
    for (int i = 0; i < n; ++i) y0.emplace_back(lay, frame.normal(i, b));

  const Rhs f = [&](const State& y) {
    std::span<const Jet> s(y.data(), k);
    std::span<const Jet> sd(y.data() + k, k);
    const SubmanifoldAt at = evaluate_on(cache.get(constants(s)), s);
    State dy(y.size(), Jet(lay));
    for (int a = 0; a < k; ++a) dy[a] = sd[a];
    for (int c = 0; c < k; ++c) {
      Jet& acc = dy[k + c];
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) acc.add_product(at.gammabar.at({c, a, b}), sd[a] * sd[b], -1.0);
    }
    if (m == 0) return dy;

    // c' = X sdot, and nabla_c' X_b = ddphi_ab sdot^a + Gamma(c', X_b)
    std::vector<Jet> cdot(n, Jet(lay));
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < k; ++a) cdot[i].add_product(at.dphi(i, a), sd[a]);
    // gc[i][l] = Gamma^i_{jl} c'^j
    JetMatrix gc(n, n, lay);
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j) gc(i, l).add_product(at.gamma.at({i, j, l}), cdot[j]);
    JetMatrix dx(n, k, lay);
    for (int i = 0; i < n; ++i)
      for (int b = 0; b < k; ++b) {
        Jet& v = dx(i, b);
        for (int a = 0; a < k; ++a) v.add_product(at.ddphi.at({i, a, b}), sd[a]);
        for (int l = 0; l < n; ++l) v.add_product(gc(i, l), at.dphi(l, b));
      }
    const JetMatrix gdx = at.g * dx;  // n x k, lowered first index
    for (int blk = 0; blk < m; ++blk) {
      const int off = 2 * k + blk * n;
      std::vector<Jet> w(k, Jet(lay));  // w_b = g(e, nabla X_b)
      for (int b = 0; b < k; ++b)
        for (int i = 0; i < n; ++i) w[b].add_product(y[off + i], gdx(i, b));
      std::vector<Jet> raised(k, Jet(lay));
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) raised[a].add_product(at.induced_inv(a, b), w[b]);
      for (int i = 0; i < n; ++i) {
        Jet& d = dy[off + i];
        for (int l = 0; l < n; ++l) d.add_product(gc(i, l), y[off + l], -1.0);
        for (int a = 0; a < k; ++a) d.add_product(at.dphi(i, a), raised[a], -1.0);
      }
    }
    return dy;
  };

  const State y = integrate(f, y0, 1.0, euclid(v0c), cfg);
  RadialResult r;
  r.s.assign(y.begin(), y.begin() + k);
  for (int blk = 0; blk < m; ++blk) r.normals.emplace_back(y.begin() + 2 * k + blk * n, y.begin() + 2 * k + (blk + 1) * n);
  return r;
}

/// Base normals projected onto N(Sigma) at c(x), then orthonormalized
/// against h in slot order.
std::vector<std::vector<Jet>> projected_normals(const MetricChart& g, const SubmanifoldChart& sigma,
                                                const AdaptedFrame& frame, std::span<const Jet> s) {
  const int n = sigma.n();
  const int m = n - sigma.k();
  const auto lay = s[0].layout();
  const SubmanifoldLocal loc = expand_submanifold(g, sigma, constants(s), lay->order());
  const SubmanifoldAt at = evaluate_on(loc, s);
  const auto hd = frame.type.reference_diagonal();
  auto inner = [&](const std::vector<Jet>& a, const std::vector<Jet>& b) {
    Jet r(lay);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r.add_product(at.g(i, j), a[i] * b[j]);
    return r;
  };
  std::vector<std::vector<Jet>> out;
  for (int b = 0; b < m; ++b) {
    std::vector<Jet> v(n, Jet(lay));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v[i].add_product(at.projector(i, j), Jet(lay, frame.normal(j, b)));
    for (int c = 0; c < b; ++c) {
      const Jet coef = hd[sigma.k() + c] * inner(v, out[c]);
      for (int i = 0; i < n; ++i) v[i].add_product(coef, out[c][i], -1.0);
    }
    const Jet norm = hd[sigma.k() + b] * inner(v, v);
    if (norm.value() <= 0) throw CoordsError("projected normal frame: lost signature away from the base point");
    const Jet inv = reciprocal(sqrt(norm));
    for (auto& vi : v) vi *= inv;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

GeodesicState geodesic_flow(const MetricChart& g, std::span<const Jet> z0, std::span<const Jet> v0,
                            const GeodesicSolverConfig& cfg, double t_end) {
  const int n = g.dim();
  if (static_cast<int>(z0.size()) != n || static_cast<int>(v0.size()) != n)
    throw CoordsError("geodesic_flow: state dimension mismatch");
  require_common_layout(z0, v0, "geodesic_flow");
  const auto lay = z0[0].layout();
  const int q = lay->order();

  PointCache<JetTensor> cache(
      [&](const std::vector<double>& p) { return expand_metric(g, p, q).christoffel; });

  const Rhs f = [&](const State& y) {
    std::span<const Jet> z(y.data(), n);
    const JetTensor gam = substitute(cache.get(constants(z)), Substitution(deltas(z), q));
    State dy(2 * n, Jet(lay));
    for (int i = 0; i < n; ++i) dy[i] = y[n + i];
    for (int c = 0; c < n; ++c) {
      Jet& acc = dy[n + c];
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) acc.add_product(gam.at({c, a, b}), y[n + a] * y[n + b], -1.0);
    }
    return dy;
  };

  State y0(z0.begin(), z0.end());
  y0.insert(y0.end(), v0.begin(), v0.end());
  const State y = integrate(f, y0, t_end, euclid(constants(v0)), cfg);
  GeodesicState out;
  out.position.assign(y.begin(), y.begin() + n);
  out.velocity.assign(y.begin() + n, y.end());
  return out;
}

std::vector<Jet> intrinsic_exp(const MetricChart& g, const SubmanifoldChart& sigma, const AdaptedFrame& frame,
                               std::span<const Jet> x, const GeodesicSolverConfig& cfg) {
  return radial_flow(g, sigma, frame, x, cfg, false).s;
}

TransportResult normal_transport(const MetricChart& g, const SubmanifoldChart& sigma, const AdaptedFrame& frame,
                                 std::span<const Jet> x, const GeodesicSolverConfig& cfg, NormalFrameMode mode) {
  TransportResult out;
  if (mode == NormalFrameMode::kParallel) {
    auto r = radial_flow(g, sigma, frame, x, cfg, true);
    out.s = std::move(r.s);
    out.normals = std::move(r.normals);
    return out;
  }
  out.s = radial_flow(g, sigma, frame, x, cfg, false).s;
  const auto lay = x[0].layout();
  if (mode == NormalFrameMode::kProjectedConstant) {
    out.normals = projected_normals(g, sigma, frame, out.s);
  } else {
    for (int b = 0; b < sigma.n() - sigma.k(); ++b) {
      std::vector<Jet> v;
      for (int i = 0; i < sigma.n(); ++i) v.emplace_back(lay, frame.normal(i, b));
      out.normals.push_back(std::move(v));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// FermiChart

FermiChart::FermiChart(MetricChart g, SubmanifoldChart sigma, AdaptedFrame frame, FermiOptions opts)
    : g_(std::move(g)),
      sigma_(std::move(sigma)),
      frame_(std::move(frame)),
      opts_(opts),
      cache_(std::make_shared<Cache>()) {
  opts_.solver.validate();
  if (!(opts_.radius > 0)) throw CoordsError("FermiChart: radius must be > 0");
  if (g_.dim() != sigma_.n()) throw CoordsError("FermiChart: metric and submanifold dimensions differ");
  if (frame_.tangent.rows() != sigma_.n() || frame_.tangent.cols() != sigma_.k())
    throw CoordsError("FermiChart: frame does not match the submanifold");
}

std::vector<Jet> FermiChart::operator()(std::span<const Jet> x, std::span<const Jet> u) const {
  const int k = sigma_.k();
  const int n = sigma_.n();
  if (static_cast<int>(x.size()) != k || static_cast<int>(u.size()) != n - k)
    throw CoordsError("fermi_map: (x, u) has the wrong dimension");
  require_common_layout(x, u, "fermi_map");
  std::vector<double> c = constants(x);
  const auto uc = constants(u);
  c.insert(c.end(), uc.begin(), uc.end());
  if (euclid(c) > opts_.radius)
    throw CoordsError("fermi_map: point lies outside the configured chart radius " + std::to_string(opts_.radius));

  const auto lay = x[0].layout();
  const TransportResult tr = normal_transport(g_, sigma_, frame_, x, opts_.solver, opts_.normal_mode);
  const std::vector<Jet> start = sigma_(tr.s);
  std::vector<Jet> v(n, Jet(lay));
  for (int b = 0; b < n - k; ++b)
    for (int i = 0; i < n; ++i) v[i].add_product(u[b], tr.normals[b][i]);
  return geodesic_flow(g_, start, v, opts_.solver).position;
}

std::vector<double> FermiChart::at(std::span<const double> x, std::span<const double> u) const {
  const auto lay = JetLayout::get(1, 0);
  std::vector<Jet> xj, uj;
  for (double v : x) xj.emplace_back(lay, v);
  for (double v : u) uj.emplace_back(lay, v);
  return constants((*this)(xj, uj));
}

std::vector<Jet> FermiChart::expansion(int order) const {
  if (order < 0) throw CoordsError("FermiChart::expansion: order must be >= 0");
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->phi.find(order);
    if (it != cache_->phi.end()) return it->second;
  }
  const int k = sigma_.k();
  const int n = sigma_.n();
  const auto lay = JetLayout::get(n, order);
  std::vector<Jet> x, u;
  for (int a = 0; a < k; ++a) x.push_back(Jet::variable(lay, a, 0.0));
  for (int b = k; b < n; ++b) u.push_back(Jet::variable(lay, b, 0.0));
  std::vector<Jet> phi = (*this)(x, u);
  std::lock_guard<std::mutex> lock(cache_->mu);
  return cache_->phi.emplace(order, std::move(phi)).first->second;
}

std::vector<Jet> fermi_map(const FermiChart& chart, std::span<const Jet> x, std::span<const Jet> u) {
  return chart(x, u);
}

JetMatrix fermi_metric_jet(const FermiChart& chart, int order) {
  if (order < 0) throw CoordsError("fermi_metric_jet: order must be >= 0");
  const int n = chart.n();
  const auto phi = chart.expansion(order + 1);
  const auto lay = JetLayout::get(n, order);
  JetMatrix dphi(n, n, lay);
  std::vector<Jet> point;
  for (int i = 0; i < n; ++i) {
    point.push_back(truncate(phi[i], order));
    for (int a = 0; a < n; ++a) dphi(i, a) = differentiate(phi[i], a);
  }
  const JetMatrix g = chart.metric()(point);
  return dphi.transpose() * g * dphi;
}

}  // namespace fermijet
