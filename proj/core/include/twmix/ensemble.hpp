#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "twmix/rng.hpp"

namespace twmix {

struct EnsembleOptions {
  std::size_t n_traj = 1200;
  std::uint64_t seed = 0;
  int threads = 1;
  // Work is claimed in fixed-size chunks so that any per-chunk accumulation
  // done by the caller is independent of the thread count.
  std::size_t chunk = 64;

  std::size_t n_chunks() const { return (n_traj + chunk - 1) / chunk; }
  std::size_t chunk_of(std::size_t traj) const { return traj / chunk; }
};

// Runs fn(i, rng) for i in [0, n_traj). The RNG handed to trajectory i
// depends only on (seed, i). Callers store per-trajectory results in slot i
// (or accumulate per chunk_of(i)), which makes every estimator bit-identical
// for any thread count. Exceptions from workers are rethrown on the caller.
void for_each_trajectory(const EnsembleOptions& opt,
                         const std::function<void(std::size_t, RngStream&)>& fn);

}
