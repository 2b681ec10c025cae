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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fermijet/fermi.hpp"
#include "test_charts.hpp"

namespace fermijet {
namespace {

using namespace fermijet::testing;

std::vector<Jet> reals(std::vector<double> v) {
  const auto lay = JetLayout::get(1, 0);
  std::vector<Jet> out;
  for (double x : v) out.emplace_back(lay, x);
  return out;
}

// Riemannian normal-coordinate metric of the unit 2-sphere,
// g_ab = delta_ab + f(r^2) (r^2 delta_ab - x_a x_b), f = -1/3 + 2 r^2/45 - r^4/315 + ...
JetMatrix sphere_normal_metric(const Jet& x, const Jet& y) {
  const Jet r2 = x * x + y * y;
  const Jet f = -1.0 / 3.0 + (2.0 / 45.0) * r2 - (1.0 / 315.0) * r2 * r2;
  JetMatrix g(2, 2, x.layout());
  g(0, 0) = 1.0 + f * (r2 - x * x);
  g(1, 1) = 1.0 + f * (r2 - y * y);
  g(0, 1) = g(1, 0) = -1.0 * f * x * y;
  return g;
}

TEST(GeodesicFlow, FlatIsStraightLine) {
  const auto g = diagonal_metric({1, 1, 1});
  const auto st = geodesic_flow(g, reals({0, 0, 0}), reals({0.3, -0.2, 0.1}), {});
  EXPECT_NEAR(st.position[0].value(), 0.3, 1e-15);
  EXPECT_NEAR(st.position[1].value(), -0.2, 1e-15);
  EXPECT_NEAR(st.position[2].value(), 0.1, 1e-15);
}

TEST(GeodesicFlow, FlatSeededVelocityIsLinear) {
  const auto g = diagonal_metric({1, 1});
  const auto lay = JetLayout::get(1, 3);
  const Jet u = Jet::variable(lay, 0, 0.0);
  const std::vector<Jet> z0{Jet(lay, 0.0), Jet(lay, 0.0)};
  const std::vector<Jet> v0{Jet(lay, 0.0), u};
  const auto st = geodesic_flow(g, z0, v0, {});
  EXPECT_NEAR(st.position[1].coeff(MultiIndex({1})), 1.0, 1e-15);
  EXPECT_NEAR(st.position[1].coeff(MultiIndex({2})), 0.0, 1e-15);
  EXPECT_NEAR(st.position[0].max_abs(), 0.0, 1e-15);
}

TEST(GeodesicFlow, SphereGreatCircleDistanceOne) {
  // Start on the equator (theta = pi/2, phi = 0) with unit velocity at angle a
  // from the equator; the endpoint is the rotation of (1,0,0) by angle 1 in
  // the plane spanned by (1,0,0) and the unit tangent.
  const double a = 0.6;
  const std::vector<double> v = {-std::sin(a), std::cos(a)};  // (dtheta, dphi)
  const auto st = geodesic_flow(sphere2(), reals({kPi / 2, 0.0}), reals(v), {});
  const double th = st.position[0].value(), ph = st.position[1].value();
  const double p[3] = {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
  // tangent in R^3: d/dtheta = (0,0,-1), d/dphi = (0,1,0)
  const double t3[3] = {0.0, std::cos(a), std::sin(a)};
  const double e[3] = {std::cos(1.0) + 0.0, std::sin(1.0) * t3[1], std::sin(1.0) * t3[2]};
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], e[i], 1e-10);
}

TEST(GeodesicFlow, RejectsMismatchedState) {
  EXPECT_THROW(geodesic_flow(diagonal_metric({1, 1}), reals({0, 0}), reals({1}), {}), CoordsError);
}

TEST(GeodesicFlow, StepBudgetExhaustion) {
  GeodesicSolverConfig cfg;
  cfg.steps_per_unit = 8;
  cfg.max_steps = 16;
  cfg.tolerance = 1e-15;
  EXPECT_THROW(geodesic_flow(sphere2(), reals({1.0, 0.0}), reals({0.3, 0.9}), cfg), CoordsError);
}

TEST(SolverConfig, Validation) {
  GeodesicSolverConfig cfg;
  cfg.steps_per_unit = 4;
  EXPECT_THROW(cfg.validate(), CoordsError);
  cfg.steps_per_unit = 16;
  cfg.tolerance = 0.0;
  EXPECT_THROW(cfg.validate(), CoordsError);
}

TEST(IntrinsicExp, AffineIsIdentity) {
  const auto g = diagonal_metric({1, 1, 1});
  const auto sig = affine(2, 3);
  const auto f = adapted_frame(g, sig, type_of(2, 0, 1, 0));
  const auto s = intrinsic_exp(g, sig, f, reals({0.2, -0.3}), {});
  EXPECT_NEAR(s[0].value(), 0.2, 1e-15);
  EXPECT_NEAR(s[1].value(), -0.3, 1e-15);
}

TEST(IntrinsicExp, CircleArcLength) {
  const auto g = diagonal_metric({1, 1});
  const auto f = adapted_frame(g, circle(), type_of(1, 0, 1, 0));
  const auto s = intrinsic_exp(g, circle(), f, reals({0.4}), {});
  EXPECT_NEAR(s[0].value(), 0.4, 1e-14);
}

TEST(IntrinsicExp, FullDimensionalSubmanifoldRejected) {
  EXPECT_THROW(SubmanifoldChart(2, 2, [](std::span<const Jet> s) { return std::vector<Jet>(s.begin(), s.end()); },
                                {kPi / 2, 0.0}),
               GeometryError);
}

TEST(NormalTransport, AffineIsConstant) {
  const auto g = diagonal_metric({1, 1, 1, 1});
  const auto sig = affine(2, 4);
  const auto f = adapted_frame(g, sig, type_of(2, 0, 2, 0));
  const auto tr = normal_transport(g, sig, f, reals({0.3, 0.1}), {});
  for (int b = 0; b < 2; ++b)
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(tr.normals[b][i].value(), f.normal(i, b), 1e-15);
}

TEST(NormalTransport, CircleNormalTracksPoint) {
  const auto g = diagonal_metric({1, 1});
  const auto f = adapted_frame(g, circle(), type_of(1, 0, 1, 0));
  for (double t : {-0.45, 0.2, 0.5}) {
    const auto tr = normal_transport(g, circle(), f, reals({t}), {});
    EXPECT_NEAR(tr.normals[0][0].value(), std::cos(t), 1e-10);
    EXPECT_NEAR(tr.normals[0][1].value(), std::sin(t), 1e-10);
  }
}

TEST(NormalTransport, GramPreservedOnHelixAndSphere) {
  const auto g = diagonal_metric({1, 1, 1});
  const double a = 0.8, b = 0.6;
  const auto hx = helix(a, b);
  const auto fh = adapted_frame(g, hx, type_of(1, 0, 2, 0));
  const auto tr = normal_transport(g, hx, fh, reals({0.5}), {});
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) {
      double ip = 0;
      for (int i = 0; i < 3; ++i) ip += tr.normals[p][i].value() * tr.normals[q][i].value();
      EXPECT_NEAR(ip, p == q ? 1.0 : 0.0, 1e-8);
    }
  const auto sp = unit_sphere_in_r3();
  const auto fs = adapted_frame(g, sp, type_of(2, 0, 1, 0));
  const auto ts = normal_transport(g, sp, fs, reals({0.3, -0.2}), {});
  double nn = 0;
  for (int i = 0; i < 3; ++i) nn += ts.normals[0][i].value() * ts.normals[0][i].value();
  EXPECT_NEAR(nn, 1.0, 1e-8);
}

TEST(NormalTransport, HelixProjectedFrameDiffersFromParallel) {
  // The helix has nonzero normal torsion, so the projected constant frame
  // rotates relative to the parallel one.
  const auto g = diagonal_metric({1, 1, 1});
  const auto hx = helix(0.8, 0.6);
  const auto f = adapted_frame(g, hx, type_of(1, 0, 2, 0));
  const auto par = normal_transport(g, hx, f, reals({0.5}), {});
  const auto prj = normal_transport(g, hx, f, reals({0.5}), {}, NormalFrameMode::kProjectedConstant);
  double diff = 0;
  for (int i = 0; i < 3; ++i) diff = std::max(diff, std::abs(par.normals[0][i].value() - prj.normals[0][i].value()));
  EXPECT_GT(diff, 1e-3);
}

TEST(FermiMap, FlatAffineIsIdentity) {
  const auto g = diagonal_metric({1, 1, 1});
  const auto sig = affine(2, 3);
  const FermiChart chart(g, sig, adapted_frame(g, sig, type_of(2, 0, 1, 0)));
  const auto phi = chart.expansion(3);
  for (int i = 0; i < 3; ++i)
    for (int idx = 0; idx < phi[i].size(); ++idx) {
      const auto& k = phi[i].layout()->monomial(idx);
      const double expect = (k.order() == 1 && k[i] == 1) ? 1.0 : 0.0;
      EXPECT_NEAR(phi[i].coeff_at(idx), expect, 1e-15);
    }
}

TEST(FermiMap, CircleOffsetClosedForm) {
  const auto g = diagonal_metric({1, 1});
  const FermiChart chart(g, circle(), adapted_frame(g, circle(), type_of(1, 0, 1, 0)));
  for (auto [t, u] : {std::pair{0.3, 0.2}, std::pair{-0.1, -0.4}, std::pair{0.0, 0.0}}) {
    const double x[] = {t}, uu[] = {u};
    const auto p = chart.at(x, uu);
    EXPECT_NEAR(p[0], (1 + u) * std::cos(t), 1e-10);
    EXPECT_NEAR(p[1], (1 + u) * std::sin(t), 1e-10);
  }
}

TEST(FermiMap, OriginAndDifferentialMatchFrame) {
  const auto g = diagonal_metric({1, 1, 1});
  const auto sig = unit_sphere_in_r3();
  const auto f = adapted_frame(g, sig, type_of(2, 0, 1, 0));
  const FermiChart chart(g, sig, f);
  const auto phi = chart.expansion(1);
  const auto p = sig.base_point();
  const Matrix full = f.full();
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(phi[i].value(), p[i], 1e-15);
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(phi[i].coeff(MultiIndex::unit(3, a)), full(i, a), 1e-8);
  }
}

TEST(FermiMap, RadiusEnforced) {
  const auto g = diagonal_metric({1, 1});
  const FermiChart chart(g, circle(), adapted_frame(g, circle(), type_of(1, 0, 1, 0)));
  const double x[] = {0.4}, u[] = {0.4};
  EXPECT_THROW(chart.at(x, u), CoordsError);
}

TEST(FermiMetricJet, CircleOffsetMetric) {
  const auto g = diagonal_metric({1, 1});
  const FermiChart chart(g, circle(), adapted_frame(g, circle(), type_of(1, 0, 1, 0)));
  const JetMatrix gt = fermi_metric_jet(chart, 4);
  EXPECT_NEAR(gt(0, 0).derivative(MultiIndex({0, 1})), 2.0, 1e-9);
  EXPECT_NEAR(gt(0, 0).derivative(MultiIndex({0, 2})), 2.0, 1e-9);
  EXPECT_LT(gt(0, 1).max_abs(), 1e-9);
  EXPECT_NEAR(gt(1, 1).value(), 1.0, 1e-12);
  for (int i = 1; i < gt(1, 1).size(); ++i) EXPECT_NEAR(gt(1, 1).coeff_at(i), 0.0, 1e-9);
  // g_tt = (1+u)^2 exactly: nothing depends on t
  for (int i = 0; i < gt(0, 0).size(); ++i) {
    const auto& k = gt(0, 0).layout()->monomial(i);
    const double expect = k[0] == 0 ? (k[1] == 0 ? 1.0 : k[1] == 1 ? 2.0 : k[1] == 2 ? 1.0 : 0.0) : 0.0;
    EXPECT_NEAR(gt(0, 0).coeff_at(i), expect, 1e-9) << k.str();
  }
}

TEST(FermiMetricJet, SphereOffsetMetric) {
  const auto g = diagonal_metric({1, 1, 1});
  const auto sig = unit_sphere_in_r3();
  const FermiChart chart(g, sig, adapted_frame(g, sig, type_of(2, 0, 1, 0)));
  const int order = 4;
  const JetMatrix gt = fermi_metric_jet(chart, order);
  const auto lay = JetLayout::get(3, order);
  const Jet x = Jet::variable(lay, 0, 0), y = Jet::variable(lay, 1, 0), u = Jet::variable(lay, 2, 0);
  const JetMatrix gs = sphere_normal_metric(x, y);
  const Jet w = (1.0 + u) * (1.0 + u);
  double worst = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) worst = std::max(worst, (gt(a, b) - w * gs(a, b)).max_abs());
  for (int a = 0; a < 2; ++a) worst = std::max(worst, gt(a, 2).max_abs());
  worst = std::max(worst, (gt(2, 2) - Jet(lay, 1.0)).max_abs());
  EXPECT_LT(worst, 1e-8);
}

// ---------------------------------------------------------------------------
// Properties

TEST(FermiProperties, SliceLiesOnSubmanifold) {
  const auto g = diagonal_metric({1, 1, 1});
  const auto sig = unit_sphere_in_r3();
  const auto f = adapted_frame(g, sig, type_of(2, 0, 1, 0));
  const FermiChart chart(g, sig, f);
  const double x[] = {0.25, -0.3}, u[] = {0.0};
  const auto p = chart.at(x, u);
  const auto s = intrinsic_exp(g, sig, f, reals({0.25, -0.3}), {});
  const double sv[] = {s[0].value(), s[1].value()};
  const auto q = sig.at(sv);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], q[i], 1e-9);
  EXPECT_NEAR(p[0] * p[0] + p[1] * p[1] + p[2] * p[2], 1.0, 1e-9);
}

TEST(FermiProperties, NormalRaysAreGeodesics) {
  // Phi(x, t u) equals the geodesic from Phi(x, 0) traced to parameter t.
  const auto g = sphere3();
  const auto sig = SubmanifoldChart(
      1, 3,
      [](std::span<const Jet> s) {
        return std::vector<Jet>{Jet(s[0].layout(), kPi / 2) + 0.2 * s[0] * s[0], Jet(s[0].layout(), kPi / 2),
                                s[0]};
      },
      {0.0});
  const auto f = adapted_frame(g, sig, type_of(1, 0, 2, 0));
  const FermiChart chart(g, sig, f);
  const double x[] = {0.2};
  const std::vector<double> u = {0.25, -0.15};
  const auto tr = normal_transport(g, sig, f, reals({0.2}), {});
  const auto start = sig(tr.s);
  std::vector<Jet> v;
  for (int i = 0; i < 3; ++i) v.push_back(u[0] * tr.normals[0][i] + u[1] * tr.normals[1][i]);
  for (double t : {0.3, 0.7, 1.0}) {
    const double ut[] = {t * u[0], t * u[1]};
    const auto p = chart.at(x, ut);
    const auto direct = geodesic_flow(g, start, v, {}, t).position;
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], direct[i].value(), 1e-8);
  }
}

double fitted_order(const std::vector<double>& err) {
  // least-squares slope of log2(err) against step index
  const int m = static_cast<int>(err.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    const double y = std::log2(err[i]);
    sx += i;
    sy += y;
    sxx += i * i;
    sxy += i * y;
  }
  return -(m * sxy - sx * sy) / (m * sxx - sx * sx);
}

TEST(FermiProperties, FourthOrderConvergence) {
  const auto g = diagonal_metric({1, 1, 1});
  {
    const auto sig = unit_sphere_in_r3();
    const auto f = adapted_frame(g, sig, type_of(2, 0, 1, 0));
    // closed form: exp on the unit sphere, then radial offset by (1+u)
    const double x[] = {0.3, 0.25}, u[] = {0.2};
    const double r = std::hypot(x[0], x[1]);
    const auto p0 = sig.base_point();
    std::vector<double> exact(3);
    for (int i = 0; i < 3; ++i) {
      const double dir = (f.tangent(i, 0) * x[0] + f.tangent(i, 1) * x[1]) / r;
      exact[i] = (1 + u[0]) * (std::cos(r) * p0[i] + std::sin(r) * dir);
    }
    std::vector<double> err;
    for (int steps : {8, 16, 32, 64}) {
      FermiOptions opts;
      opts.solver.steps_per_unit = steps;
      opts.solver.halving_check = false;
      const FermiChart chart(g, sig, f, opts);
      const auto p = chart.at(x, u);
      double e = 0;
      for (int i = 0; i < 3; ++i) e = std::max(e, std::abs(p[i] - exact[i]));
      err.push_back(e);
    }
    EXPECT_GE(fitted_order(err), 3.7);
  }
  {
    const auto g2 = diagonal_metric({1, 1});
    const auto f = adapted_frame(g2, circle(), type_of(1, 0, 1, 0));
    const double x[] = {0.35}, u[] = {0.3};
    std::vector<double> err;
    for (int steps : {8, 16, 32, 64}) {
      FermiOptions opts;
      opts.solver.steps_per_unit = steps;
      opts.solver.halving_check = false;
      const FermiChart chart(g2, circle(), f, opts);
      const auto p = chart.at(x, u);
      err.push_back(std::max(std::abs(p[0] - 1.3 * std::cos(0.35)), std::abs(p[1] - 1.3 * std::sin(0.35))));
    }
    EXPECT_GE(fitted_order(err), 3.7);
  }
}

TEST(FermiProperties, JetsMatchFiniteDifferences) {
  const auto g = sphere3();
  const auto sig = SubmanifoldChart(
      2, 3,
      [](std::span<const Jet> s) {
        return std::vector<Jet>{Jet(s[0].layout(), 1.2) + 0.1 * s[0] * s[1], s[0] + Jet(s[0].layout(), 1.3), s[1]};
      },
      {0.0, 0.0});
  const FermiChart chart(g, sig, adapted_frame(g, sig, type_of(2, 0, 1, 0)));
  const auto phi = chart.expansion(2);
  auto at = [&](double a, double b, double c) {
    const double x[] = {a, b}, u[] = {c};
    return chart.at(x, u);
  };
  const double h = 1e-3;
  for (int v = 0; v < 3; ++v) {
    double e[3] = {0, 0, 0};
    e[v] = h;
    const auto p = at(e[0], e[1], e[2]);
    const auto m = at(-e[0], -e[1], -e[2]);
    const auto c = at(0, 0, 0);
    for (int i = 0; i < 3; ++i) {
      const double d1 = (p[i] - m[i]) / (2 * h);
      const double d2 = (p[i] - 2 * c[i] + m[i]) / (h * h);
      EXPECT_NEAR(phi[i].derivative(MultiIndex::unit(3, v)), d1, 1e-6);
      EXPECT_NEAR(phi[i].derivative(MultiIndex::unit(3, v) + MultiIndex::unit(3, v)), d2, 1e-6);
    }
  }
  // one mixed second derivative
  const auto pp = at(h, 0, h), pm = at(h, 0, -h), mp = at(-h, 0, h), mm = at(-h, 0, -h);
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(phi[i].derivative(MultiIndex({1, 0, 1})), (pp[i] - pm[i] - mp[i] + mm[i]) / (4 * h * h), 1e-6);
}

TEST(FermiProperties, FrameChangeEquivariance) {
  // Rotating the tangent frame by R and the normal frame by R' gives
  // Phi'(x, u) = Phi(R x, R' u).
  const auto g = diagonal_metric({1, 1, 1, 1});
  const auto sig = SubmanifoldChart(
      2, 4,
      [](std::span<const Jet> s) {
        return std::vector<Jet>{s[0], s[1], 0.3 * s[0] * s[0] - 0.2 * s[1] * s[1], 0.4 * s[0] * s[1]};
      },
      {0.0, 0.0});
  const auto f = adapted_frame(g, sig, type_of(2, 0, 2, 0));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int trial = 0; trial < 2; ++trial) {
    const double a = ang(rng), b = ang(rng);
    const double sgn = trial == 0 ? 1.0 : -1.0;  // include a reflection
    const double ra[2][2] = {{std::cos(a), -std::sin(a)}, {std::sin(a), std::cos(a)}};
    const double rb[2][2] = {{std::cos(b), -sgn * std::sin(b)}, {std::sin(b), sgn * std::cos(b)}};
    AdaptedFrame f2 = f;
    for (int i = 0; i < 4; ++i)
      for (int c = 0; c < 2; ++c) {
        f2.tangent(i, c) = f.tangent(i, 0) * ra[0][c] + f.tangent(i, 1) * ra[1][c];
        f2.normal(i, c) = f.normal(i, 0) * rb[0][c] + f.normal(i, 1) * rb[1][c];
      }
    for (int p = 0; p < 2; ++p)
      for (int c = 0; c < 2; ++c)
        f2.tangent_params(p, c) = f.tangent_params(p, 0) * ra[0][c] + f.tangent_params(p, 1) * ra[1][c];
    const FermiChart c1(g, sig, f), c2(g, sig, f2);
    const double x[] = {0.2, -0.15}, u[] = {0.1, 0.2};
    const double rx[] = {ra[0][0] * x[0] + ra[0][1] * x[1], ra[1][0] * x[0] + ra[1][1] * x[1]};
    const double ru[] = {rb[0][0] * u[0] + rb[0][1] * u[1], rb[1][0] * u[0] + rb[1][1] * u[1]};
    const auto p2 = c2.at(x, u);
    const auto p1 = c1.at(rx, ru);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(p1[i], p2[i], 1e-8);
  }
}

TEST(FermiProperties, ExpansionIsCachedAndDeterministic) {
  const auto g = diagonal_metric({1, 1});
  const FermiChart chart(g, circle(), adapted_frame(g, circle(), type_of(1, 0, 1, 0)));
  const auto a = chart.expansion(3);
  const FermiChart copy = chart;
  const auto b = copy.expansion(3);
  for (int i = 0; i < 2; ++i)
    for (int c = 0; c < a[i].size(); ++c) EXPECT_EQ(a[i].coeff_at(c), b[i].coeff_at(c));
}

}  // namespace
}  // namespace fermijet
