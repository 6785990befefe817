#include <benchmark/benchmark.h>

#include <vector>

#include "twmix/ensemble.hpp"
#include "twmix/four_mode.hpp"

namespace {

void bm_ensemble_scan(benchmark::State& state) {
  twmix::FourModeParams p;
  twmix::EnsembleOptions opt;
  opt.n_traj = static_cast<std::size_t>(state.range(0));
  opt.seed = 42;
  const std::vector<double> times = {2e-5, 4e-5};
  for (auto _ : state) {
    auto points = twmix::four_mode_scan(p, times, opt);
    benchmark::DoNotOptimize(points.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          state.range(0));
}

}  // namespace

BENCHMARK(bm_ensemble_scan)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
