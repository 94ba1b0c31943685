// Serial reference loop against the OpenMP cell scheduler on two sweep shapes.
// Thread count follows OMP_NUM_THREADS.

#include "pcalign/experiments.hpp"

#include <benchmark/benchmark.h>

using namespace pcalign;

namespace {

ExperimentConfig alignment_sweep(Execution ex) {
  auto cfg = preset("fig2_onestep").front().config;
  cfg.input_dim = cfg.output_dim = cfg.hidden_width = 64;
  cfg.seeds = {0, 1, 2, 3};
  cfg.execution = ex;
  return cfg;
}

ExperimentConfig training_sweep(Execution ex) {
  auto cfg = preset("fig4_train").front().config;
  cfg.lr_grid = LrGrid{-3.5, 0.4, 4};
  cfg.seeds = {0, 1};
  cfg.steps = 100;
  cfg.execution = ex;
  return cfg;
}

void BM_Alignment(benchmark::State& state) {
  const auto cfg = alignment_sweep(state.range(0) ? Execution::Parallel : Execution::Serial);
  for (auto _ : state) benchmark::DoNotOptimize(run_alignment(cfg));
  state.SetLabel(state.range(0) ? "parallel" : "serial");
}

void BM_Training(benchmark::State& state) {
  const auto cfg = training_sweep(state.range(0) ? Execution::Parallel : Execution::Serial);
  for (auto _ : state) benchmark::DoNotOptimize(run_training(cfg));
  state.SetLabel(state.range(0) ? "parallel" : "serial");
}

}  // namespace

BENCHMARK(BM_Alignment)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Training)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
