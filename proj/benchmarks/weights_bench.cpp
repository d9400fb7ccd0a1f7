#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include "ldptails/weight_schemes.hpp"

namespace {

using namespace ldptails;

void BM_GenerateKernel(benchmark::State& state) {
  const WeightScheme scheme(KernelWeights{KernelSpec::epanechnikov()});
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate(scheme, n).data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateKernel)->RangeMultiplier(8)->Range(64, 1 << 15);

void BM_GenerateSelfNormalized(benchmark::State& state) {
  const WeightScheme scheme(SelfNormalizedRandom{ThetaDistribution(ThetaUniform{0.0, 1.0}), 3});
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate(scheme, n).data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateSelfNormalized)->RangeMultiplier(8)->Range(64, 1 << 15);

void BM_AssumptionAReport(benchmark::State& state) {
  const WeightScheme scheme(KernelWeights{KernelSpec::epanechnikov()});
  const std::vector<std::size_t> grid{100, 300, 1000, 3000};
  for (auto _ : state) {
    benchmark::DoNotOptimize(assumption_a_report(scheme, 5, grid, 1e-2).a1_pass);
  }
}
BENCHMARK(BM_AssumptionAReport)->Unit(benchmark::kMillisecond);

}  // namespace
