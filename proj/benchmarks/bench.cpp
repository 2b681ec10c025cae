#include <benchmark/benchmark.h>

#include <vector>

#include "fermijet/config.hpp"
#include "fermijet/fermi.hpp"
#include "fermijet/jet.hpp"

namespace {

using namespace fermijet;

// args: nvars, order
void BM_JetMultiply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), q = static_cast<int>(state.range(1));
  const auto lay = JetLayout::get(n, q);
  Jet a(lay), b(lay);
  for (int i = 0; i < lay->size(); ++i) {
    a.coeff_at(i) = 1.0 / (1 + i);
    b.coeff_at(i) = 0.5 - 0.01 * i;
  }
  for (auto _ : state) benchmark::DoNotOptimize(a * b);
  state.counters["coeffs"] = lay->size();
}
BENCHMARK(BM_JetMultiply)->Args({2, 4})->Args({4, 4})->Args({4, 6})->Args({6, 4});

void BM_JetCompose(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), q = static_cast<int>(state.range(1));
  const auto lay = JetLayout::get(n, q);
  Jet outer(lay);
  for (int i = 0; i < lay->size(); ++i) outer.coeff_at(i) = 1.0 / (1 + i);
  std::vector<Jet> inner;
  for (int v = 0; v < n; ++v) {
    Jet z = Jet::variable(lay, v, 0.0);
    inner.push_back(z + 0.1 * z * z);
  }
  for (auto _ : state) benchmark::DoNotOptimize(compose(outer, inner));
}
BENCHMARK(BM_JetCompose)->Args({2, 4})->Args({4, 4});

void BM_FermiMetricJet(benchmark::State& state, const char* name, int order) {
  const CaseGeometry g = build_case(catalog_case(name));
  const AdaptedFrame f = adapted_frame(g.metric, g.submanifold, g.type);
  for (auto _ : state) {
    // fresh chart each iteration so the expansion cache does not hide the work
    const FermiChart chart(g.metric, g.submanifold, f);
    benchmark::DoNotOptimize(fermi_metric_jet(chart, order));
  }
}
BENCHMARK_CAPTURE(BM_FermiMetricJet, circle_order4, "circle-in-plane", 4)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_FermiMetricJet, sphere_order4, "sphere2-in-r3", 4)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_FermiMetricJet, perturbed_flat_order3, "eps-perturbed-flat", 3)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
