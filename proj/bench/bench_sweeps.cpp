// Compares the OpenMP sweep kernels against their serial references on
// sampled-mode workloads. The two paths are bit-identical by construction;
// these benchmarks measure what the parallel schedule buys on top.
#include <benchmark/benchmark.h>

#include <numbers>

#include "pwclock/observer.hpp"
#include "pwclock/tomography.hpp"

namespace {

pwclock::ObserverConfig observer_workload(std::int64_t shots) {
  pwclock::ObserverConfig cfg;
  for (int i = 0; i < 24; ++i) {
    cfg.tau_list.push_back(i * 2.0 * std::numbers::pi / 24.0);
  }
  cfg.delta_grid_size = 64;
  cfg.shots_per_delta = shots;
  cfg.rng_seed = 5;
  return cfg;
}

pwclock::TomographyConfig tomography_workload(std::int64_t counts) {
  pwclock::TomographyConfig cfg;
  for (int i = 0; i < 16; ++i) cfg.external_times.push_back(0.4 * i);
  cfg.counts_per_projection = counts;
  cfg.rng_seed = 5;
  return cfg;
}

void BM_ObserverSweepSerial(benchmark::State& state) {
  const pwclock::ObserverConfig cfg = observer_workload(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pwclock::run_observer_serial(cfg));
  }
}

void BM_ObserverSweepParallel(benchmark::State& state) {
  const pwclock::ObserverConfig cfg = observer_workload(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pwclock::run_observer(cfg));
  }
}

void BM_SuperObserverSerial(benchmark::State& state) {
  const pwclock::TomographyConfig cfg = tomography_workload(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pwclock::run_superobserver_serial(cfg));
  }
}

void BM_SuperObserverParallel(benchmark::State& state) {
  const pwclock::TomographyConfig cfg = tomography_workload(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pwclock::run_superobserver(cfg));
  }
}

}  // namespace

BENCHMARK(BM_ObserverSweepSerial)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ObserverSweepParallel)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SuperObserverSerial)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SuperObserverParallel)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
