#include "twmix/ensemble.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "twmix/errors.hpp"

namespace twmix {

void for_each_trajectory(const EnsembleOptions& opt,
                         const std::function<void(std::size_t, RngStream&)>& fn) {
  if (opt.n_traj == 0) return;
  if (opt.chunk == 0) throw ConfigError("ensemble chunk size must be positive");

  const std::size_t n_chunks = opt.n_chunks();
  const auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * opt.chunk;
    const std::size_t end = std::min(begin + opt.chunk, opt.n_traj);
    for (std::size_t i = begin; i < end; ++i) {
      RngStream rng(opt.seed, i);
      fn(i, rng);
    }
  };

  const std::size_t n_workers =
      std::min<std::size_t>(std::max(opt.threads, 1), n_chunks);
  if (n_workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        run_chunk(c);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace twmix
