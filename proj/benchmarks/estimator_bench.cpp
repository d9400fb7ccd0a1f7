#include <benchmark/benchmark.h>

#include <cstddef>

#include "ldptails/rare_event_mc.hpp"

namespace {

ldptails::SimulationPlan plan_for(std::size_t n) {
  ldptails::SimulationPlan plan;
  plan.n_grid = {n};
  plan.x = 4.0;
  plan.replications = 4096;
  plan.seed = 1;
  return plan;
}

void BM_Naive(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto plan = plan_for(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ldptails::simulate_naive(plan, n).p_hat);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(plan.replications));
}
BENCHMARK(BM_Naive)->Arg(4)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_BigJumpIS(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto plan = plan_for(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ldptails::simulate_big_jump_is(plan, n).p_hat);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(plan.replications));
}
BENCHMARK(BM_BigJumpIS)->Arg(4)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace
