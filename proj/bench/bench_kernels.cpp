// Serial reference kernels versus their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "netrawalm/delay_matrix.hpp"
#include "netrawalm/scenario_gen.hpp"
#include "netrawalm/sweep.hpp"

using namespace netrawalm;

namespace {

Scenario sample(std::size_t hosts) {
  GeneratorConfig g;
  g.node_count = hosts;
  return generate_scenario(Scenario{}, g, 7);
}

void BM_DelayMatrix(benchmark::State& state, Execution exec) {
  const auto s = sample(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(compute_delay_matrix(s.topology, PathMetric::delay, exec));
  state.SetComplexityN(state.range(0));
}

void BM_Sweep(benchmark::State& state, Execution exec) {
  Scenario base;
  base.bandwidth = {10'000'000, 1'000'000, 250'000};
  SweepConfig config;
  config.counts = {static_cast<std::size_t>(state.range(0))};
  config.seeds = 4;
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(base, config, exec));
}

}  // namespace

BENCHMARK_CAPTURE(BM_DelayMatrix, serial, Execution::serial)->RangeMultiplier(2)->Range(32, 512);
BENCHMARK_CAPTURE(BM_DelayMatrix, parallel, Execution::parallel)->RangeMultiplier(2)->Range(32, 512);
BENCHMARK_CAPTURE(BM_Sweep, serial, Execution::serial)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Sweep, parallel, Execution::parallel)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
