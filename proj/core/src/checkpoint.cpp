#include "twmix/checkpoint.hpp"

#include <cstring>
#include <filesystem>

#include "twmix/errors.hpp"

namespace twmix {

namespace {

constexpr char kMagic[8] = {'T', 'W', 'M', 'X', 'E', 'N', 'S', '1'};

// magic + v + hash + seed + time + model + n_traj + values + grid_n + 2 f64
constexpr std::uint64_t kHeaderSize = 8 + 4 + 32 + 8 + 8 + 4 + 8 + 8 + 8 + 16;

template <typename T>
void put(std::string& buf, const T& v) {
  const char* p = reinterpret_cast<const char*>(&v);
  buf.append(p, sizeof(T));
}

template <typename T>
T take(const char*& p, const char* end) {
  if (p + sizeof(T) > end) throw CheckpointError("snapshot file truncated");
  T v;
  std::memcpy(&v, p, sizeof(T));
  p += sizeof(T);
  return v;
}

std::string encode_header(const CheckpointHeader& h) {
  std::string buf;
  buf.reserve(kHeaderSize);
  buf.append(kMagic, sizeof kMagic);
  put(buf, h.version);
  buf.append(reinterpret_cast<const char*>(h.config_hash.data()), h.config_hash.size());
  put(buf, h.seed);
  put(buf, h.created_unix);
  put(buf, h.model);
  put(buf, h.n_traj);
  put(buf, h.values_per_traj);
  put(buf, h.grid_n);
  put(buf, h.grid_length);
  put(buf, h.grid_x_min);
  return buf;
}

}  // namespace

CheckpointWriter::CheckpointWriter(const std::string& path, const CheckpointHeader& h)
    : header_(h) {
  if (h.n_traj == 0 || h.values_per_traj == 0)
    throw CheckpointError("snapshot needs trajectories and values per trajectory");
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw CheckpointError("cannot create snapshot file: " + path);
  const std::string head = encode_header(h);
  payload_offset_ = head.size();
  out_.write(head.data(), static_cast<std::streamsize>(head.size()));
  // Preallocate so out-of-order writes land in a fully defined file.
  const std::uint64_t payload = h.n_traj * h.values_per_traj * 16;
  out_.seekp(static_cast<std::streamoff>(payload_offset_ + payload - 1));
  const char zero = 0;
  out_.write(&zero, 1);
  if (!out_) throw CheckpointError("snapshot preallocation failed");
}

CheckpointWriter::~CheckpointWriter() {
  try {
    finish();
  } catch (...) {
  }
}

void CheckpointWriter::write_trajectory(std::size_t index,
                                        std::span<const std::complex<double>> values) {
  if (index >= header_.n_traj) throw CheckpointError("trajectory index out of range");
  if (values.size() != header_.values_per_traj)
    throw CheckpointError("trajectory size mismatch");
  std::lock_guard lock(mutex_);
  if (finished_) throw CheckpointError("snapshot already finished");
  const std::uint64_t offset =
      payload_offset_ + static_cast<std::uint64_t>(index) * header_.values_per_traj * 16;
  out_.seekp(static_cast<std::streamoff>(offset));
  out_.write(reinterpret_cast<const char*>(values.data()),
             static_cast<std::streamsize>(values.size() * 16));
  if (!out_) throw CheckpointError("snapshot write failed");
}

void CheckpointWriter::finish() {
  std::lock_guard lock(mutex_);
  if (finished_) return;
  finished_ = true;
  out_.flush();
  out_.close();
  if (out_.fail()) throw CheckpointError("snapshot close failed");
}

std::span<const std::complex<double>> Checkpoint::trajectory(std::size_t i) const {
  if (i >= header.n_traj) throw CheckpointError("trajectory index out of range");
  return {data.data() + i * header.values_per_traj, header.values_per_traj};
}

Checkpoint read_checkpoint(const std::string& path,
                           const std::array<std::uint8_t, 32>* expect_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open snapshot file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const char* p = bytes.data();
  const char* end = p + bytes.size();
  if (bytes.size() < kHeaderSize) throw CheckpointError("snapshot file truncated");
  if (std::memcmp(p, kMagic, sizeof kMagic) != 0)
    throw CheckpointError("not a snapshot file (bad magic)");
  p += sizeof kMagic;

  Checkpoint cp;
  CheckpointHeader& h = cp.header;
  h.version = take<std::uint32_t>(p, end);
  if (h.version != 1) throw CheckpointError("unsupported snapshot version");
  std::memcpy(h.config_hash.data(), p, 32);
  p += 32;
  h.seed = take<std::uint64_t>(p, end);
  h.created_unix = take<std::uint64_t>(p, end);
  h.model = take<std::uint32_t>(p, end);
  h.n_traj = take<std::uint64_t>(p, end);
  h.values_per_traj = take<std::uint64_t>(p, end);
  h.grid_n = take<std::uint64_t>(p, end);
  h.grid_length = take<double>(p, end);
  h.grid_x_min = take<double>(p, end);

  if (expect_hash && *expect_hash != h.config_hash)
    throw CheckpointError("snapshot does not match this config");

  const std::uint64_t expected = h.n_traj * h.values_per_traj;
  if (static_cast<std::uint64_t>(end - p) != expected * 16)
    throw CheckpointError("snapshot payload size mismatch");
  cp.data.resize(expected);
  std::memcpy(cp.data.data(), p, expected * 16);
  return cp;
}

}  // namespace twmix
