#include <benchmark/benchmark.h>

#include "dflsim/learner.hpp"

using namespace dflsim;

static void train_epoch(benchmark::State& state) {
  const auto ds = synthetic_blobs(10, static_cast<int>(state.range(0)) / 10, 784, 0.1, 1);
  const auto p = init_model(MlpArchitecture::mnist(), 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(p, ds, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(train_epoch)->Arg(600)->Arg(6000)->Unit(benchmark::kMillisecond);

static void evaluate_test_set(benchmark::State& state) {
  const auto ds = synthetic_blobs(10, 1000, 784, 0.1, 2);
  const auto p = init_model(MlpArchitecture::mnist(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(p, ds));
}
BENCHMARK(evaluate_test_set)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
