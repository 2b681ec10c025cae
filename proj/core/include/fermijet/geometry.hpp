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

// Chart-level pseudo-Riemannian geometry on jets.
//
// Curvature convention: R^i_{jkl} = d_k G^i_{lj} - d_l G^i_{kj}
//   + G^i_{km} G^m_{lj} - G^i_{lm} G^m_{kj},  R_{ijkl} = g_{im} R^m_{jkl},
// so that the unit round sphere has R_{ijkl} = g_ik g_jl - g_il g_jk. In this
// convention normal coordinates satisfy d_k d_l g_ij = (2/3) R_{i(kl)j}.
//
// Second fundamental form: L(X, Y) = (nabla_X Y)^perp. For the unit circle
// with outward normal this gives L = -1. Gauss equation:
//   Rbar_{abcd} = R_{abcd} + <L_ac, L_bd> - <L_ad, L_bc>.

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fermijet/jet.hpp"
#include "fermijet/linalg.hpp"
#include "fermijet/tensor.hpp"

namespace fermijet {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Signature {
  int positive = 0;
  int negative = 0;

  int dim() const { return positive + negative; }
  bool operator==(const Signature&) const = default;
};

/// ((p,q),(p',q')): signatures of g on T(Sigma) and N(Sigma).
struct SubmanifoldType {
  Signature tangent;
  Signature normal;

  int k() const { return tangent.dim(); }
  int n() const { return tangent.dim() + normal.dim(); }
  Signature ambient() const { return {tangent.positive + normal.positive, tangent.negative + normal.negative}; }
  /// Diagonal of the reference form h: +1 then -1 within each block.
  std::vector<double> reference_diagonal() const;
  Matrix reference_form() const { return Matrix::diagonal(reference_diagonal()); }
  void validate() const;
  bool operator==(const SubmanifoldType&) const = default;
};

class MetricChart {
 public:
  /// Maps n jet-valued coordinates to the symmetric n x n matrix g_ij.
  using Evaluator = std::function<JetMatrix(std::span<const Jet>)>;

  MetricChart(int dim, Signature signature, Evaluator eval);

  int dim() const { return dim_; }
  Signature signature() const { return signature_; }
  JetMatrix operator()(std::span<const Jet> point) const;
  /// Metric at a real point.
  Matrix at(std::span<const double> point) const;
  /// Checks nondegeneracy and signature of g(z0).
  void check_point(std::span<const double> z0) const;

 private:
  int dim_;
  Signature signature_;
  Evaluator eval_;
};

class SubmanifoldChart {
 public:
  /// Maps k jet-valued parameters to the n ambient coordinates.
  using Evaluator = std::function<std::vector<Jet>(std::span<const Jet>)>;

  SubmanifoldChart(int k, int n, Evaluator eval, std::vector<double> base);

  int k() const { return k_; }
  int n() const { return n_; }
  const std::vector<double>& base() const { return base_; }
  std::vector<Jet> operator()(std::span<const Jet> s) const;
  /// Expansion of phi(s0 + w) in k fresh variables w.
  std::vector<Jet> expand(std::span<const double> s0, int order) const;
  std::vector<double> at(std::span<const double> s) const;
  std::vector<double> base_point() const { return at(base_); }

 private:
  int k_;
  int n_;
  Evaluator eval_;
  std::vector<double> base_;
};

/// Orthonormal frames at the base point. Column a of `tangent` is e_a in
/// ambient components; `tangent_params` holds the same vectors in the
/// parameter coordinates of the submanifold chart.
struct AdaptedFrame {
  SubmanifoldType type;
  Matrix tangent;          // n x k
  Matrix tangent_params;   // k x k
  Matrix normal;           // n x (n-k)
  Matrix h;                // n x n reference form

  /// n x n matrix [tangent | normal].
  Matrix full() const;
};

// ---------------------------------------------------------------------------
// Jet-level building blocks

/// Metric and connection expanded about a real point in fresh variables w.
struct LocalMetric {
  JetMatrix g;             // order q + 1
  JetMatrix ginv;          // order q
  JetTensor christoffel;   // Gamma^k_ij as [k][i][j], order q
};

/// Expands g(z0 + w) so that the Christoffel symbols carry order q.
LocalMetric expand_metric(const MetricChart& g, std::span<const double> z0, int q);

/// Gamma^k_{ij} from a metric jet of order q (result has order q - 1).
JetTensor christoffel_from(const JetMatrix& g);
JetTensor christoffel_from(const JetMatrix& g, const JetMatrix& ginv);

/// All-covariant R_{ijkl} from g (order >= q+1) and Gamma (order q); order q - 1.
JetTensor riemann_from(const JetMatrix& g, const JetTensor& gamma);

/// nabla T for an all-covariant tensor; the new index is appended last.
JetTensor covariant_derivative(const JetTensor& t, const JetTensor& gamma);

// ---------------------------------------------------------------------------
// Operations

/// Gamma^k_{ij}(z0 + w) to the requested jet order.
JetTensor christoffel(const MetricChart& g, std::span<const double> z0, int order);

/// [Rm, nabla Rm, ..., nabla^m Rm] at z0, coordinate components.
std::vector<TensorAtPoint> riemann(const MetricChart& g, std::span<const double> z0, int m);

/// (i^* g)_{ab}(s0 + w) as a k x k jet matrix of the given order.
JetMatrix induced_metric(const MetricChart& g, const SubmanifoldChart& sigma,
                         std::span<const double> s0, int order);

/// Signature-adapted Gram-Schmidt at the base point of sigma.
AdaptedFrame adapted_frame(const MetricChart& g, const SubmanifoldChart& sigma,
                           const SubmanifoldType& type);

/// [L, nablabar L, ..., nablabar^m L] in frame components, slots
/// (tangential, tangential, normal, tangential x m), normal index lowered.
std::vector<TensorAtPoint> second_fundamental_form(const MetricChart& g, const SubmanifoldChart& sigma,
                                                   const AdaptedFrame& frame, int m);

/// max |Rbar - (R|_T + L*L)| over intrinsic components at the base point.
double gauss_residual(const MetricChart& g, const SubmanifoldChart& sigma, const AdaptedFrame& frame);

/// [Rm, ..., nabla^m Rm] at the base point in the adapted frame.
std::vector<TensorAtPoint> frame_curvature(const MetricChart& g, const SubmanifoldChart& sigma,
                                           const AdaptedFrame& frame, int m);

// ---------------------------------------------------------------------------
// Submanifold data expanded about a parameter point, shared by the second
// fundamental form and the normal transport equations.

struct SubmanifoldLocal {
  int q = 0;                // order of every field below unless noted
  std::vector<Jet> phi;     // order q + 2
  JetMatrix dphi;           // n x k, d_a phi^i
  JetTensor ddphi;          // [i][a][b]
  JetMatrix g;              // ambient metric at phi(s)
  JetTensor gamma;          // ambient Christoffel at phi(s), [i][j][k]
  JetMatrix induced;        // G_ab, order q + 1
  JetMatrix induced_inv;    // G^ab
  JetTensor gammabar;       // intrinsic Christoffel, [c][a][b]
  JetMatrix normal_projector;  // P^i_j onto N(Sigma)
};

SubmanifoldLocal expand_submanifold(const MetricChart& g, const SubmanifoldChart& sigma,
                                    std::span<const double> s0, int q);

/// L^i_{ab}(s0 + w) as ambient normal vectors, [i][a][b], order q.
JetTensor second_fundamental_vectors(const SubmanifoldLocal& loc);

}  // namespace fermijet
