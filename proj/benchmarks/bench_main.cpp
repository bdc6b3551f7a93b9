#include <benchmark/benchmark.h>

#include "nevlab/brownian.h"
#include "nevlab/meromorphic.h"
#include "nevlab/nevanlinna.h"
#include "nevlab/philox.h"

namespace {

using namespace nevlab;

void BM_PhiloxBlock(benchmark::State& state) {
  Philox4x32::Block ctr{0, 0, 0, 0};
  const Philox4x32::Key key{0x12345678u, 0x9abcdef0u};
  for (auto _ : state) {
    ++ctr[0];
    benchmark::DoNotOptimize(Philox4x32::generate(ctr, key));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxBlock);

void BM_NormalPair(benchmark::State& state) {
  PhiloxStream stream(42, 0);
  for (auto _ : state) benchmark::DoNotOptimize(normal_pair(stream));
  state.SetItemsProcessed(2 * state.iterations());
}
BENCHMARK(BM_NormalPair);

// One stopped path per iteration; steps per second is the figure of merit.
void BM_StoppedPath(benchmark::State& state) {
  const ModelSurface surface =
      state.range(0) == 0 ? ModelSurface::euclidean_plane() : ModelSurface::poincare_disc();
  SimConfig config;
  config.radius = 1.0;
  config.step_dt = 1e-4;
  std::uint64_t index = 0, steps = 0;
  for (auto _ : state) {
    const StoppedPath p = simulate_stopped_path(surface, config, {}, index++);
    steps += p.steps;
  }
  state.counters["steps/s"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_StoppedPath)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_CharacteristicQuadrature(benchmark::State& state) {
  const MeromorphicMap f = catalog_map("exp", {1.0, 0.0});
  const ModelSurface surface = ModelSurface::euclidean_plane();
  const double r = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(characteristic_T(f, surface, r).value);
}
BENCHMARK(BM_CharacteristicQuadrature)->Arg(2)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_CountingFunction(benchmark::State& state) {
  const MeromorphicMap f = catalog_map("exp", {1.0, 0.0});
  const ModelSurface surface = ModelSurface::euclidean_plane();
  for (auto _ : state)
    benchmark::DoNotOptimize(counting_N(f, ProjectivePoint::finite({1.0, 0.0}), surface, 30.0));
}
BENCHMARK(BM_CountingFunction)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
