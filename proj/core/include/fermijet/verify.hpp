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

// Checks on a measured metric jet g~ in submanifold normal coordinates.
// Index conventions: Fermi coordinates are ordered (x^0..x^{k-1}, u^0..u^{n-k-1}),
// so a component index i < k is tangential and i >= k is normal. Frame
// tensors follow the slot layouts of geometry.hpp.

#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fermijet/fermi.hpp"
#include "fermijet/geometry.hpp"
#include "fermijet/jet.hpp"
#include "fermijet/linalg.hpp"
#include "fermijet/tensor.hpp"

namespace fermijet {

class VerifyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Characterization conditions
//
//   (A) g_ab(x,0) x^b = h_ab x^b        (B) g_a'b'(x,u) u^b' = h_a'b' u^b'
//   (C) d_b' g_aa'(x,0) x^a = 0         (D) g_aa'(x,u) u^a' = 0

struct ConditionResult {
  char name = '?';
  double residual = 0.0;   // max |Taylor coefficient| of the contracted expression
  int component = -1;      // free index of the worst entry (flattened for (C))
  MultiIndex worst;
  bool pass = false;
};

struct ConditionReport {
  int order = 0;
  double tolerance = 0.0;
  std::array<ConditionResult, 4> conditions;

  bool pass() const;
  const ConditionResult& operator[](char name) const;
};

/// Requires g~ centered at the origin with jet order >= order.
ConditionReport check_conditions(const JetMatrix& gt, const Matrix& h, int k, int order, double tol);

// ---------------------------------------------------------------------------
// Linear-order prediction

struct PredictionEntry {
  int i = 0;
  int j = 0;
  MultiIndex k;
  double value = 0.0;  // predicted d^K g~_ij(0)
  int row = 0;         // 1..13 in the order of the table in prediction.cpp
};

struct LinearPrediction {
  int n = 0;
  int k = 0;
  int order = 0;
  std::vector<PredictionEntry> entries;  // i <= j, every |K| <= order

  const PredictionEntry* find(int i, int j, const MultiIndex& kk) const;
};

const char* prediction_row_label(int row);

/// curv[m] = nabla^m Rm and fund[m] = nablabar^m L in adapted-frame components
/// (see frame_curvature / second_fundamental_form). Needs curv up to
/// order - 2 and fund up to order - 1.
LinearPrediction predict_linear_jet(std::span<const TensorAtPoint> curv, std::span<const TensorAtPoint> fund,
                                    const Matrix& h, int k, int order);

/// Average of t over all permutations of the values at `positions` of idx.
double symmetrized(const TensorAtPoint& t, std::vector<int> idx, std::span<const int> positions);
/// Tensor symmetrized over the listed slots.
TensorAtPoint symmetrize(const TensorAtPoint& t, std::span<const int> slots);

// ---------------------------------------------------------------------------
// Comparisons

struct ComparisonEntry {
  int i = 0;
  int j = 0;
  MultiIndex k;
  int row = 0;
  double measured = 0.0;
  double predicted = 0.0;
  double abs_dev = 0.0;
  double rel_dev = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ComparisonReport {
  std::vector<ComparisonEntry> entries;
  std::vector<double> eps_used;            // empty for exact comparisons
  std::vector<double> scaling_eps;         // eps values of the O(eps^2) fit
  std::vector<double> scaling_deviation;   // max |D(eps) - P(eps)| per eps
  std::optional<double> fitted_exponent;
  double min_exponent = 0.0;

  bool pass() const;
  double max_abs_dev() const;
};

inline constexpr double kRelativeFloor = 1e-12;

double relative_deviation(double measured, double predicted);

/// All |K| = 1 rows, absolute tolerance `tol`.
ComparisonReport compare_first_order(const JetMatrix& measured, const LinearPrediction& pred, double tol = 1e-7);

/// A one-parameter family of (metric, submanifold) pairs with a flat,
/// totally geodesic member at eps = 0.
struct CaseGeometry {
  MetricChart metric;
  SubmanifoldChart submanifold;
  SubmanifoldType type;
};
using Family = std::function<CaseGeometry(double eps)>;

struct LinearizeOptions {
  int order = 3;
  int min_order = 2;
  double eps = 1e-3;                                // slope step; the difference also uses 2 eps
  std::vector<double> scaling_eps = {1e-2, 5e-3, 2.5e-3};
  double rel_tol = 1e-3;
  /// Slopes below this magnitude on both sides count as agreeing zeros.
  double abs_floor = 1e-9;
  double min_exponent = 1.8;
  FermiOptions fermi;
};

/// Measured and predicted data for one family member.
struct MemberData {
  JetMatrix measured;
  LinearPrediction prediction;
};
MemberData measure_member(const CaseGeometry& c, int order, const FermiOptions& opts);

ComparisonReport linearized_compare(const Family& family, const LinearizeOptions& opts);

// ---------------------------------------------------------------------------
// Frame coefficients theta^i = a^i_j dz^j

struct FrameCoefficientJet {
  JetMatrix a;  // a^i_j, rows = frame index, cols = coordinate index
  Matrix h;
  int k = 0;
};

/// Curvature and second fundamental form as jets in the Fermi chart:
/// riemann[i][j][k][l] are coordinate components of Rm (all lowered), and
/// lvec[a'][a][b] = L^{a'}_{ab}(x) on u = 0 with the normal index taken in the
/// basis d/du^{a'}.
struct FermiTensorJets {
  JetTensor riemann;
  JetTensor lvec;
};
FermiTensorJets fermi_tensor_jets(const FermiChart& chart, int order);

/// Homogeneous-degree staging of the frame recursion, total order <= 3.
FrameCoefficientJet solve_frame_coefficients(const FermiTensorJets& t, const Matrix& h, int k, int order);

/// g^_ij = h_kl a^k_i a^l_j.
JetMatrix reassemble_metric_jet(const FrameCoefficientJet& a);

/// max over components and |K| <= order of |d^K (a - b)|.
double max_derivative_deviation(const JetMatrix& a, const JetMatrix& b, int order);

}  // namespace fermijet
