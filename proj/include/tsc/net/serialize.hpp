#pragma once

// Binary container used for network blobs and training checkpoints.
// Multi-byte values are little-endian; doubles are stored as their IEEE-754
// bit pattern, so round trips are bit-exact.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsc/net/mlp.hpp"
#include "tsc/net/optim.hpp"

namespace tsc::net {

inline constexpr std::uint32_t kMlpFormatVersion = 1;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64s(std::span<const double> values);
  void str(std::string_view s);
  void blob(std::span<const std::uint8_t> b);

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

/// Reads what ByteWriter wrote; throws DecodeError when the data runs out.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::vector<double> f64s(std::size_t count);
  std::string str();
  std::vector<std::uint8_t> blob();

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> take(std::size_t n);

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// Appends a CRC-32 of everything written so far.
void seal(ByteWriter& w);
/// Verifies and strips the trailing CRC-32; returns the payload.
std::span<const std::uint8_t> unseal(std::span<const std::uint8_t> bytes);

/// Layout: "TMLP" | u32 version | u32 layer count | per layer { u32 index,
/// u64 in, u64 out, u8 activation, u8 has_bn, f64 weights[out*in] (row-major),
/// f64 bias[out], [f64 momentum, f64 epsilon, f64 mean[in], f64 var[in]] }
/// | u32 crc32.
std::vector<std::uint8_t> serialize(const Mlp& net);
Mlp deserialize(std::span<const std::uint8_t> bytes);

void write_adam(ByteWriter& w, const AdamState& s);
AdamState read_adam(ByteReader& r);

}  // namespace tsc::net
