#pragma once

#include <complex>
#include <cstdint>

namespace twmix {

// Counter-free PRNG with per-trajectory streams. Stream i is seeded by
// splitmix64 expansion of (seed + i * golden), so any subset of trajectories
// can be generated independently and in any order with identical output.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t next_u64();

  // Uniform on [0, 1).
  double uniform01();

  // Gaussian via Box-Muller, two variates per draw pair, one cached.
  double normal(double sigma = 1.0);

  // Independent Gaussians on both quadratures.
  std::complex<double> complex_normal(double sigma_per_quadrature);

 private:
  std::uint64_t s_[4];
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Phase-space sample of a coherent state: mean + half-quantum of symmetric
// vacuum noise (1/2 variance split over the two quadratures).
std::complex<double> sample_coherent(std::complex<double> mean, RngStream& rng);

// Sample with the coherent-state modulus distribution replaced by a fixed
// radius sqrt(|mean|^2 + 1/2); phase noise is kept. Used for inputs whose
// atom number is actively stabilized.
std::complex<double> sample_number_stabilized(std::complex<double> mean, RngStream& rng);

}
