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

// Submanifold geodesic normal coordinates
//
//   Phi(x, u) = exp_{c(x)}(u^a' e_a'(x)),   c(x) = exp^Sigma_p(x^a e_a),
//
// where e_a'(x) is the normal frame carried along t -> c(tx) by the normal
// connection. Every map here accepts jet-valued arguments, so seeding (x, u)
// as jet variables yields the Taylor expansion of Phi at the origin.

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include "fermijet/geometry.hpp"
#include "fermijet/jet.hpp"

namespace fermijet {

class CoordsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Classical RK4 with a fixed step; the halving check reruns with twice the
/// steps until successive results agree to `tolerance` (relative to the
/// largest state coefficient, floored at 1).
struct GeodesicSolverConfig {
  int steps_per_unit = 64;
  double tolerance = 1e-10;
  int max_steps = 1 << 14;
  bool halving_check = true;

  void validate() const;
};

struct GeodesicState {
  std::vector<Jet> position;
  std::vector<Jet> velocity;
};

/// Integrates z'' + Gamma(z', z') = 0 from (z0, v0) over [0, t_end].
GeodesicState geodesic_flow(const MetricChart& g, std::span<const Jet> z0, std::span<const Jet> v0,
                            const GeodesicSolverConfig& cfg, double t_end = 1.0);

/// Parameter point s(x) with phi(s(x)) = exp of the induced metric at the
/// base point applied to x^a e_a.
std::vector<Jet> intrinsic_exp(const MetricChart& g, const SubmanifoldChart& sigma, const AdaptedFrame& frame,
                               std::span<const Jet> x, const GeodesicSolverConfig& cfg);

enum class NormalFrameMode {
  kParallel,           // normal-connection transport (the construction)
  kProjectedConstant,  // base normals projected onto N(Sigma) and re-orthonormalized
  kConstant,           // base normals held fixed in ambient components
};

struct TransportResult {
  std::vector<Jet> s;                      // parameter point s(x)
  std::vector<std::vector<Jet>> normals;   // normals[a'][i], ambient components
};

/// Normal frame at c(x). kParallel solves nabla-perp e_a' = 0 along the radial
/// geodesic, written as e' = -Gamma(c', e) - X_a G^ab g(e, nabla_c' X_b) so the
/// right side is the normal projection of the ambient transport at every step.
TransportResult normal_transport(const MetricChart& g, const SubmanifoldChart& sigma, const AdaptedFrame& frame,
                                 std::span<const Jet> x, const GeodesicSolverConfig& cfg,
                                 NormalFrameMode mode = NormalFrameMode::kParallel);

struct FermiOptions {
  GeodesicSolverConfig solver;
  double radius = 0.5;
  NormalFrameMode normal_mode = NormalFrameMode::kParallel;
};

class FermiChart {
 public:
  FermiChart(MetricChart g, SubmanifoldChart sigma, AdaptedFrame frame, FermiOptions opts = {});

  const MetricChart& metric() const { return g_; }
  const SubmanifoldChart& submanifold() const { return sigma_; }
  const AdaptedFrame& frame() const { return frame_; }
  const FermiOptions& options() const { return opts_; }
  int k() const { return sigma_.k(); }
  int n() const { return sigma_.n(); }
  std::vector<double> base_point() const { return sigma_.base_point(); }

  std::vector<Jet> operator()(std::span<const Jet> x, std::span<const Jet> u) const;
  std::vector<double> at(std::span<const double> x, std::span<const double> u) const;

  /// Taylor expansion of Phi at (0,0) in the n variables (x, u). Cached.
  std::vector<Jet> expansion(int order) const;

 private:
  MetricChart g_;
  SubmanifoldChart sigma_;
  AdaptedFrame frame_;
  FermiOptions opts_;

  struct Cache {
    std::mutex mu;
    std::map<int, std::vector<Jet>> phi;
  };
  std::shared_ptr<Cache> cache_;
};

std::vector<Jet> fermi_map(const FermiChart& chart, std::span<const Jet> x, std::span<const Jet> u);

/// g~_ab(x, u) = g_ij(Phi) d_a Phi^i d_b Phi^j about the origin, to `order`.
JetMatrix fermi_metric_jet(const FermiChart& chart, int order);

}  // namespace fermijet
