// Timings for the pipeline stages on the NE-like scenario (9 tasks, 61 samples).

#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "gpkmd/gp.hpp"
#include "gpkmd/koopman.hpp"
#include "gpkmd/montecarlo.hpp"

using namespace gpkmd;

namespace {

const SnapshotSequence& series() {
  static const SnapshotSequence seq = fixtures::ne_series();
  return seq;
}

TrainingSet training(int p) { return build_training_set(series(), p); }

const HyperCandidate kHyper{{4.0, 8.0}, 1e-4};

void BM_Gram(benchmark::State& state) {
  const auto ts = training(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gram_matrix(ts, kHyper.kernel));
}
BENCHMARK(BM_Gram)->Arg(5)->Arg(15)->Arg(30);

void BM_Fit(benchmark::State& state) {
  const auto ts = training(static_cast<int>(state.range(0)));
  const auto tasks = TaskCovariance::from_output_scales(ts.output_scales(), kHyper.noise_variance);
  for (auto _ : state) benchmark::DoNotOptimize(fit(ts, kHyper.kernel, tasks));
}
BENCHMARK(BM_Fit)->Arg(5)->Arg(15)->Arg(30)->Unit(benchmark::kMicrosecond);

void BM_LooScore(benchmark::State& state) {
  const auto ts = training(15);
  for (auto _ : state) benchmark::DoNotOptimize(loocv_score(ts, kHyper));
}
BENCHMARK(BM_LooScore)->Unit(benchmark::kMicrosecond);

void BM_LooSelectDefaultGrid(benchmark::State& state) {
  const auto ts = training(15);
  const auto grid = HyperGrid{}.candidates();
  const auto workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(loocv_select(ts, grid, LooObjective::kSquaredError, workers));
}
BENCHMARK(BM_LooSelectDefaultGrid)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Decompose(benchmark::State& state) {
  const auto ts = training(15);
  const auto model = fit(ts, kHyper.kernel, TaskCovariance::from_output_scales(ts.output_scales(), kHyper.noise_variance));
  for (auto _ : state) benchmark::DoNotOptimize(decompose(model));
}
BENCHMARK(BM_Decompose)->Unit(benchmark::kMicrosecond);

void BM_Simulate(benchmark::State& state) {
  const auto grid = fixtures::ne_grid();
  const auto init = disturbed_init(grid, find_equilibrium(grid), 8, 1.5, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(simulate(grid, init, 4.0, 1.0 / 15.0));
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMicrosecond);

void BM_MonteCarloTrials(benchmark::State& state) {
  MonteCarloOptions opt;
  opt.n_trials = static_cast<int>(state.range(0));
  opt.noise_sigma = 0.1;
  opt.hyper.fixed = kHyper;
  for (auto _ : state) benchmark::DoNotOptimize(run_trials(series(), opt));
}
BENCHMARK(BM_MonteCarloTrials)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace
BENCHMARK_MAIN();
