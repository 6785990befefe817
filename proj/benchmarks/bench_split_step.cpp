#include <benchmark/benchmark.h>

#include "twmix/ground_state.hpp"
#include "twmix/multimode.hpp"
#include "twmix/rng.hpp"

namespace {

twmix::MultimodeParams small_params(std::size_t n) {
  twmix::MultimodeParams p;
  p.grid = {n, 2.1e-3, -0.55e-3};
  twmix::Trap1D trap;
  p.u1d = 1e-38;
  p.psi0 = twmix::thomas_fermi_profile(p.grid, trap, 2.02e5 * p.u1d);
  return p;
}

void bm_split_step(benchmark::State& state) {
  auto p = small_params(static_cast<std::size_t>(state.range(0)));
  twmix::RngStream rng(1, 0);
  twmix::FieldPair f = twmix::sample_multimode(p, rng);
  const std::size_t steps = 16;
  const double duration = p.dt * static_cast<double>(steps);
  for (auto _ : state) {
    twmix::evolve_multimode(f, p, duration);
    benchmark::DoNotOptimize(f.a.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(steps));
}

}  // namespace

BENCHMARK(bm_split_step)->Arg(4096)->Arg(16384);
