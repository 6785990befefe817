#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace twmix {

// Binary trajectory snapshot. Layout (little-endian):
//   8 bytes  magic "TWMXENS1"
//   u32      format version (1)
//   32 bytes config hash
//   u64      base seed
//   u64      creation time (unix seconds; ignored when comparing files)
//   u32      model tag (0 single-mode, 1 multimode)
//   u64      trajectories
//   u64      complex values per trajectory
//   u64      grid points (0 for single-mode)
//   f64      grid length, grid x_min
//   payload: trajectories * values * (re, im) f64
struct CheckpointHeader {
  std::uint32_t version = 1;
  std::array<std::uint8_t, 32> config_hash{};
  std::uint64_t seed = 0;
  std::uint64_t created_unix = 0;
  std::uint32_t model = 0;
  std::uint64_t n_traj = 0;
  std::uint64_t values_per_traj = 0;
  std::uint64_t grid_n = 0;
  double grid_length = 0, grid_x_min = 0;
};

inline constexpr std::uint32_t kModelFourMode = 0;
inline constexpr std::uint32_t kModelMultimode = 1;

// Fixed-offset records, safe to fill from worker threads in any order; the
// finished file depends only on header fields and trajectory contents.
class CheckpointWriter {
 public:
  CheckpointWriter(const std::string& path, const CheckpointHeader& h);
  ~CheckpointWriter();

  void write_trajectory(std::size_t index, std::span<const std::complex<double>> values);
  void finish();

 private:
  std::ofstream out_;
  CheckpointHeader header_;
  std::uint64_t payload_offset_ = 0;
  std::mutex mutex_;
  bool finished_ = false;
};

struct Checkpoint {
  CheckpointHeader header;
  std::vector<std::complex<double>> data;

  std::span<const std::complex<double>> trajectory(std::size_t i) const;
};

// Throws CheckpointError on bad magic, version, size, or (when expect_hash
// is given) config hash mismatch.
Checkpoint read_checkpoint(const std::string& path,
                           const std::array<std::uint8_t, 32>* expect_hash = nullptr);

}
