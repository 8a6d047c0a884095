#include <benchmark/benchmark.h>

#include "dflsim/topology.hpp"

using namespace dflsim;

static void exposure_pmf(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(malicious_exposure_pmf(n, n / 2, n / 4));
}
BENCHMARK(exposure_pmf)->Arg(10)->Arg(1000);

static void watts_strogatz_graph(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(watts_strogatz(n, 8, 0.3, ++seed));
}
BENCHMARK(watts_strogatz_graph)->Arg(10)->Arg(200);

BENCHMARK_MAIN();
