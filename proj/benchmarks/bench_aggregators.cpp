#include <benchmark/benchmark.h>

#include <random>

#include "dflsim/aggregators.hpp"
#include "dflsim/learner.hpp"

using namespace dflsim;

namespace {

// Ten MNIST-sized models, as one fully connected node sees them.
struct Candidates {
  std::vector<ModelParams> models;
  LabeledDataset validation;
  AggregationInput input;

  explicit Candidates(int n) {
    const auto arch = MlpArchitecture::mnist();
    for (int i = 0; i < n; ++i) models.push_back(init_model(arch, static_cast<std::uint64_t>(i + 1)));
    validation = synthetic_blobs(10, 60, 784, 0.1, 3);
    input.own_id = 0;
    input.own_model = &models[0];
    input.own_previous = &models[1];
    input.local_validation = &validation;
    for (int i = 1; i < n; ++i) input.neighbors.emplace_back(i, &models[static_cast<std::size_t>(i)]);
  }
};

void run(benchmark::State& state, AggregatorKind kind) {
  static const Candidates c(10);
  AggregatorSpec spec;
  spec.kind = kind;
  spec.sentinel_threshold = -1.0;
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(spec, c.input));
}

}  // namespace

BENCHMARK_CAPTURE(run, fedavg, AggregatorKind::fedavg)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(run, krum, AggregatorKind::krum)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(run, median, AggregatorKind::median)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(run, trimmed_mean, AggregatorKind::trimmed_mean)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(run, fltrust, AggregatorKind::fltrust)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(run, sentinel, AggregatorKind::sentinel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
