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

#include "fermijet/geometry.hpp"
#include "test_charts.hpp"

namespace fermijet {
namespace {

using namespace fermijet::testing;

TEST(Christoffel, FlatIsZero) {
  const auto g = diagonal_metric({1, 1, 1});
  const double z0[] = {0.3, -1, 2};
  const auto gam = christoffel(g, z0, 3);
  for (int f = 0; f < gam.shape().size(); ++f) EXPECT_EQ(gam.flat(f).max_abs(), 0.0);
}

TEST(Christoffel, PolarAtRadiusTwo) {
  const double z0[] = {2.0, 0.3};
  const auto gam = christoffel(polar(), z0, 1);
  EXPECT_NEAR(gam.at({0, 1, 1}).value(), -2.0, 1e-14);
  EXPECT_NEAR(gam.at({1, 0, 1}).value(), 0.5, 1e-14);
  EXPECT_NEAR(gam.at({1, 1, 0}).value(), 0.5, 1e-14);
  EXPECT_NEAR(gam.at({0, 0, 0}).value(), 0.0, 1e-14);
  // d_r Gamma^theta_{r theta} = -1/r^2
  EXPECT_NEAR(gam.at({1, 0, 1}).coeff(MultiIndex({1, 0})), -0.25, 1e-13);
}

TEST(Christoffel, MinkowskiIsZero) {
  const auto g = diagonal_metric({-1, 1});
  const double z0[] = {0.0, 0.0};
  const auto gam = christoffel(g, z0, 2);
  for (int f = 0; f < gam.shape().size(); ++f) EXPECT_EQ(gam.flat(f).max_abs(), 0.0);
}

TEST(Christoffel, SingularMetricThrows) {
  const auto g = MetricChart(2, {2, 0}, [](std::span<const Jet> z) {
    JetMatrix m(2, 2, z[0].layout());
    m(0, 0) = Jet(z[0].layout(), 1.0);
    m(1, 1) = z[0] * z[0];
    return m;
  });
  const double z0[] = {0.0, 0.0};
  EXPECT_THROW(christoffel(g, z0, 1), GeometryError);
}

TEST(Riemann, FlatAndScaledFlatVanish) {
  const double z0[] = {0.1, 0.2, 0.3};
  for (const auto& g : {diagonal_metric({1, 1, 1}), diagonal_metric({3, 3, 3}), diagonal_metric({-2, 2, 2})}) {
    const auto r = riemann(g, z0, 2);
    ASSERT_EQ(r.size(), 3u);
    for (const auto& t : r) EXPECT_EQ(t.max_abs(), 0.0);
  }
}

TEST(Riemann, UnitSphereSectionalCurvatureOne) {
  const double z0[] = {kPi / 2, 0.0};
  const auto r = riemann(sphere2(), z0, 0).front();
  EXPECT_NEAR(r.at({0, 1, 0, 1}), 1.0, 1e-12);
  EXPECT_NEAR(r.at({0, 1, 1, 0}), -1.0, 1e-12);
  EXPECT_NEAR(r.at({0, 0, 0, 1}), 0.0, 1e-12);
}

TEST(Riemann, SphereAgreesWithFiniteDifferenceOfChristoffel) {
  // Independent path: R^0_{101} = d_0 G^0_{11} - d_1 G^0_{01} + G^0_{0m}G^m_{11} - G^0_{1m}G^m_{01}
  // with closed-form Gamma: G^0_{11} = -sin cos, G^1_{01} = cot.
  const double th = 1.1;
  const double h = 1e-5;
  auto g011 = [](double t) { return -std::sin(t) * std::cos(t); };
  const double d0g011 = (g011(th + h) - g011(th - h)) / (2 * h);
  const double r0101 = d0g011 - g011(th) * (std::cos(th) / std::sin(th));
  const double z0[] = {th, 0.4};
  const auto r = riemann(sphere2(), z0, 0).front();
  EXPECT_NEAR(r.at({0, 1, 0, 1}), r0101, 1e-8);
  EXPECT_NEAR(r.at({0, 1, 0, 1}), std::sin(th) * std::sin(th), 1e-12);
}

TEST(Riemann, SymmetriesAndBianchi) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int trial = 0; trial < 3; ++trial) {
    const double z0[] = {u(rng), u(rng), u(rng)};
    const auto r = riemann(warped3(), z0, 1);
    const auto& rm = r[0];
    EXPECT_LT(rm.swap_defect(0, 1, 1.0), 1e-9);
    EXPECT_LT(rm.swap_defect(2, 3, 1.0), 1e-9);
    double pair = 0, bianchi1 = 0, bianchi2 = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) {
            pair = std::max(pair, std::abs(rm.at({i, j, k, l}) - rm.at({k, l, i, j})));
            bianchi1 = std::max(bianchi1, std::abs(rm.at({i, j, k, l}) + rm.at({i, k, l, j}) + rm.at({i, l, j, k})));
            for (int m = 0; m < 3; ++m) {
              const auto& d = r[1];
              bianchi2 = std::max(bianchi2, std::abs(d.at({i, j, k, l, m}) + d.at({i, j, l, m, k}) +
                                                     d.at({i, j, m, k, l})));
            }
          }
    EXPECT_LT(pair, 1e-9);
    EXPECT_LT(bianchi1, 1e-9);
    EXPECT_LT(bianchi2, 1e-7);
    EXPECT_GT(rm.max_abs(), 1e-3);
  }
}

TEST(InducedMetric, AffineIsConstant) {
  const auto g = diagonal_metric({1, 1, 1});
  const double s0[] = {0.0, 0.0};
  const auto m = induced_metric(g, affine(2, 3), s0, 3);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      EXPECT_EQ(m(a, b).value(), a == b ? 1.0 : 0.0);
      for (int i = 1; i < m(a, b).size(); ++i) EXPECT_EQ(m(a, b).coeff_at(i), 0.0);
    }
}

TEST(InducedMetric, UnitCircle) {
  const double s0[] = {0.7};
  const auto m = induced_metric(diagonal_metric({1, 1}), circle(), s0, 4);
  EXPECT_NEAR(m(0, 0).value(), 1.0, 1e-15);
  for (int i = 1; i < m(0, 0).size(); ++i) EXPECT_NEAR(m(0, 0).coeff_at(i), 0.0, 1e-14);
}

TEST(InducedMetric, SpacelikeLineInMinkowski) {
  const auto line = SubmanifoldChart(
      1, 2, [](std::span<const Jet> s) { return std::vector<Jet>{Jet(s[0].layout(), 0.0), s[0]}; }, {0.0});
  const double s0[] = {0.0};
  EXPECT_EQ(induced_metric(diagonal_metric({-1, 1}), line, s0, 2)(0, 0).value(), 1.0);
}

TEST(InducedMetric, DegeneratePullbackThrows) {
  const auto null_line = SubmanifoldChart(1, 2, [](std::span<const Jet> s) { return std::vector<Jet>{s[0], s[0]}; },
                                          {0.0});
  const double s0[] = {0.0};
  EXPECT_THROW(induced_metric(diagonal_metric({-1, 1}), null_line, s0, 2), GeometryError);
}

TEST(AdaptedFrameTest, AffineGivesStandardBasis) {
  const auto f = adapted_frame(diagonal_metric({1, 1, 1}), affine(2, 3), type_of(2, 0, 1, 0));
  const Matrix full = f.full();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(full(i, j), i == j ? 1.0 : 0.0);
}

TEST(AdaptedFrameTest, UnitCircleAtOneZero) {
  const auto f = adapted_frame(diagonal_metric({1, 1}), circle(), type_of(1, 0, 1, 0));
  EXPECT_NEAR(f.tangent(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(f.tangent(1, 0), 1.0, 1e-15);
  // Outward normal: the ambient candidate (1,0) is processed first.
  EXPECT_NEAR(f.normal(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(f.normal(1, 0), 0.0, 1e-15);
}

TEST(AdaptedFrameTest, TimelikeCurveInMinkowski) {
  const auto curve = SubmanifoldChart(
      1, 2, [](std::span<const Jet> s) { return std::vector<Jet>{s[0], Jet(s[0].layout(), 0.0)}; }, {0.0});
  const auto f = adapted_frame(diagonal_metric({-1, 1}), curve, type_of(0, 1, 1, 0));
  EXPECT_NEAR(f.tangent(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(f.tangent(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(f.normal(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(f.normal(1, 0), 1.0, 1e-15);
  EXPECT_EQ(f.h(0, 0), -1.0);
}

TEST(AdaptedFrameTest, SignatureMismatchThrows) {
  const auto curve = SubmanifoldChart(
      1, 2, [](std::span<const Jet> s) { return std::vector<Jet>{s[0], Jet(s[0].layout(), 0.0)}; }, {0.0});
  EXPECT_THROW(adapted_frame(diagonal_metric({-1, 1}), curve, type_of(1, 0, 0, 1)), GeometryError);
}

TEST(AdaptedFrameTest, GramConditionsOnBoostedSurface) {
  // A tilted spacelike plane in R^{1,2} with a curved embedding.
  const auto g = diagonal_metric({-1, 1, 1});
  const auto sig = SubmanifoldChart(
      2, 3,
      [](std::span<const Jet> s) {
        return std::vector<Jet>{0.3 * s[0] + 0.1 * s[1] * s[1], s[0] + 0.2 * s[1], s[1] - 0.4 * s[0]};
      },
      {0.1, -0.2});
  const auto f = adapted_frame(g, sig, type_of(2, 0, 0, 1));
  const Matrix full = f.full();
  const Matrix g0 = g.at(sig.base_point());
  const Matrix gram = full.transpose() * g0 * full;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(gram(i, j), f.h(i, j), 1e-12);
  // tangent_params reproduce the ambient tangent vectors through d phi
  const auto phi = sig.expand(sig.base(), 1);
  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < 3; ++i) {
      double v = 0;
      for (int b = 0; b < 2; ++b) v += phi[i].coeff(MultiIndex::unit(2, b)) * f.tangent_params(b, a);
      EXPECT_NEAR(v, f.tangent(i, a), 1e-13);
    }
}

TEST(SecondFundamentalForm, AffineVanishes) {
  const auto g = diagonal_metric({1, 1, 1});
  const auto sig = affine(2, 3);
  const auto f = adapted_frame(g, sig, type_of(2, 0, 1, 0));
  for (const auto& t : second_fundamental_form(g, sig, f, 2)) EXPECT_EQ(t.max_abs(), 0.0);
}

TEST(SecondFundamentalForm, UnitCircleOutwardNormal) {
  const auto g = diagonal_metric({1, 1});
  const auto f = adapted_frame(g, circle(), type_of(1, 0, 1, 0));
  const auto l = second_fundamental_form(g, circle(), f, 2);
  EXPECT_NEAR(l[0].at({0, 0, 0}), -1.0, 1e-13);
  EXPECT_NEAR(l[1].at({0, 0, 0, 0}), 0.0, 1e-12);
  EXPECT_NEAR(l[2].at({0, 0, 0, 0, 0}), 0.0, 1e-11);
}

TEST(SecondFundamentalForm, GraphAtVertex) {
  for (double kappa : {0.5, 1.0, 2.0}) {
    const auto g = diagonal_metric({1, 1});
    const auto f = adapted_frame(g, graph(kappa), type_of(1, 0, 1, 0));
    const auto l = second_fundamental_form(g, graph(kappa), f, 1);
    EXPECT_NEAR(l[0].at({0, 0, 0}), kappa, 1e-13);
    // brute force: phi'' projected on the normal
    const double h = 1e-4;
    auto y = [kappa](double x) { return 0.5 * kappa * x * x; };
    EXPECT_NEAR(l[0].at({0, 0, 0}), (y(h) - 2 * y(0) + y(-h)) / (h * h), 1e-6);
    // d/ds of curvature of a parabola vanishes at the vertex
    EXPECT_NEAR(l[1].at({0, 0, 0, 0}), 0.0, 1e-12);
  }
}

TEST(SecondFundamentalForm, SymmetricInTangentialSlots) {
  const auto g = warped3();
  const auto sig = SubmanifoldChart(
      2, 3,
      [](std::span<const Jet> s) {
        return std::vector<Jet>{s[0] + 0.3 * s[1] * s[1], s[1] + 0.2 * s[0] * s[1], 0.4 * s[0] * s[0] - 0.1 * s[1]};
      },
      {0.1, 0.2});
  const auto f = adapted_frame(g, sig, type_of(2, 0, 1, 0));
  const auto l = second_fundamental_form(g, sig, f, 1);
  EXPECT_LT(l[0].swap_defect(0, 1, -1.0), 1e-10);
  EXPECT_GT(l[0].max_abs(), 1e-2);
}

TEST(SecondFundamentalForm, RotatedChartKeepsNorm) {
  const double angle = 0.7;
  const double c = std::cos(angle), s = std::sin(angle);
  const auto rotated = SubmanifoldChart(
      1, 2,
      [c, s](std::span<const Jet> t) {
        const Jet x = cos(t[0]), y = sin(t[0]);
        return std::vector<Jet>{c * x - s * y, s * x + c * y};
      },
      {0.3});
  const auto g = diagonal_metric({1, 1});
  const auto f0 = adapted_frame(g, circle(), type_of(1, 0, 1, 0));
  const auto f1 = adapted_frame(g, rotated, type_of(1, 0, 1, 0));
  const double n0 = second_fundamental_form(g, circle(), f0, 0)[0].at({0, 0, 0});
  const double n1 = second_fundamental_form(g, rotated, f1, 0)[0].at({0, 0, 0});
  EXPECT_NEAR(n0 * n0, n1 * n1, 1e-9);
}

TEST(GaussResidual, FlatAffine) {
  const auto g = diagonal_metric({1, 1, 1});
  const auto f = adapted_frame(g, affine(2, 3), type_of(2, 0, 1, 0));
  EXPECT_LT(gauss_residual(g, affine(2, 3), f), 1e-14);
}

TEST(GaussResidual, UnitSphereInR3) {
  const auto g = diagonal_metric({1, 1, 1});
  const auto sig = unit_sphere_in_r3();
  const auto f = adapted_frame(g, sig, type_of(2, 0, 1, 0));
  EXPECT_LE(gauss_residual(g, sig, f), 1e-8);
  // intrinsic curvature is nonzero so the check is not vacuous
  const auto l = second_fundamental_form(g, sig, f, 0)[0];
  EXPECT_NEAR(std::abs(l.at({0, 0, 0})), 1.0, 1e-12);
}

TEST(GaussResidual, GreatCircleInS3) {
  const auto sig = SubmanifoldChart(
      1, 3,
      [](std::span<const Jet> s) {
        return std::vector<Jet>{Jet(s[0].layout(), kPi / 2), Jet(s[0].layout(), kPi / 2), s[0]};
      },
      {0.0});
  const auto f = adapted_frame(sphere3(), sig, type_of(1, 0, 2, 0));
  EXPECT_LE(gauss_residual(sphere3(), sig, f), 1e-8);
}

TEST(GaussResidual, CurvedSurfaceInCurvedAmbient) {
  const auto g = warped3();
  const auto sig = SubmanifoldChart(
      2, 3,
      [](std::span<const Jet> s) {
        return std::vector<Jet>{s[0] + 0.3 * s[1] * s[1], s[1] + 0.2 * s[0] * s[1], 0.4 * s[0] * s[0] - 0.1 * s[1]};
      },
      {0.1, 0.2});
  const auto f = adapted_frame(g, sig, type_of(2, 0, 1, 0));
  EXPECT_LE(gauss_residual(g, sig, f), 1e-8);
}

}  // namespace
}  // namespace fermijet
