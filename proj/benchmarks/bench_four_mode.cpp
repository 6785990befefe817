#include <benchmark/benchmark.h>

#include "twmix/four_mode.hpp"
#include "twmix/rng.hpp"

namespace {

void bm_four_mode_step(benchmark::State& state) {
  twmix::FourModeParams p;
  twmix::RngStream rng(1, 0);
  twmix::FourModeState s = twmix::sample_four_mode(p, rng);
  const auto steps = static_cast<std::size_t>(state.range(0));
  const double duration = p.dt * static_cast<double>(steps);
  for (auto _ : state) {
    twmix::evolve_four_mode(s, p, duration);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(steps));
}

}  // namespace

BENCHMARK(bm_four_mode_step)->Arg(100)->Arg(1000);
