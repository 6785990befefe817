#include "twmix/rng.hpp"

#include <cmath>
#include <numbers>

namespace twmix {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t splitmix64(std::uint64_t& x) {
  x += kGolden;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_index) {
  std::uint64_t x = seed + stream_index * kGolden;
  for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t RngStream::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal(double sigma) {
  if (has_cached_) {
    has_cached_ = false;
    return sigma * cached_;
  }
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(ang);
  has_cached_ = true;
  return sigma * r * std::cos(ang);
}

std::complex<double> RngStream::complex_normal(double sigma_per_quadrature) {
  const double re = normal(sigma_per_quadrature);
  const double im = normal(sigma_per_quadrature);
  return {re, im};
}

std::complex<double> sample_coherent(std::complex<double> mean, RngStream& rng) {
  return mean + rng.complex_normal(0.5);
}

std::complex<double> sample_number_stabilized(std::complex<double> mean, RngStream& rng) {
  const std::complex<double> z = sample_coherent(mean, rng);
  const double r = std::sqrt(std::norm(mean) + 0.5);
  const double mag = std::abs(z);
  if (mag == 0.0) return {r, 0.0};
  return z * (r / mag);
}

}  // namespace twmix
