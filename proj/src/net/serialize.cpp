#include "tsc/net/serialize.hpp"

#include <bit>
#include <boost/crc.hpp>

#include "tsc/errors.hpp"

namespace tsc::net {
namespace {

constexpr std::uint8_t kMlpMagic[4] = {'T', 'M', 'L', 'P'};

}  // namespace

void ByteWriter::u32(std::uint32_t v) {
  for (int k = 0; k < 4; ++k) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int k = 0; k < 8; ++k) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::f64s(std::span<const double> values) {
  bytes_.reserve(bytes_.size() + 8 * values.size());
  for (double v : values) f64(v);
}

void ByteWriter::str(std::string_view s) {
  u64(s.size());
  bytes_.insert(bytes_.end(), s.begin(), s.end());
}

void ByteWriter::blob(std::span<const std::uint8_t> b) {
  u64(b.size());
  bytes_.insert(bytes_.end(), b.begin(), b.end());
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  if (n > remaining()) throw DecodeError("truncated data");
  auto s = bytes_.subspan(pos_, n);
  pos_ += n;
  return s;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint32_t ByteReader::u32() {
  auto b = take(4);
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[k]) << (8 * k);
  return v;
}

std::uint64_t ByteReader::u64() {
  auto b = take(8);
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::vector<double> ByteReader::f64s(std::size_t count) {
  if (count > remaining() / 8) throw DecodeError("truncated data");
  std::vector<double> out(count);
  for (double& v : out) v = f64();
  return out;
}

std::string ByteReader::str() {
  const auto n = u64();
  auto b = take(n);
  return {b.begin(), b.end()};
}

std::vector<std::uint8_t> ByteReader::blob() {
  const auto n = u64();
  auto b = take(n);
  return {b.begin(), b.end()};
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

void seal(ByteWriter& w) { w.u32(crc32(w.bytes())); }

std::span<const std::uint8_t> unseal(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw DecodeError("truncated data");
  auto payload = bytes.first(bytes.size() - 4);
  ByteReader tail(bytes.last(4));
  if (tail.u32() != crc32(payload)) throw DecodeError("checksum mismatch");
  return payload;
}

std::vector<std::uint8_t> serialize(const Mlp& net) {
  ByteWriter w;
  for (auto b : kMlpMagic) w.u8(b);
  w.u32(kMlpFormatVersion);
  w.u32(static_cast<std::uint32_t>(net.layers().size()));
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    const LayerSpec& s = net.layers()[k];
    w.u32(static_cast<std::uint32_t>(k));
    w.u64(s.in_dim);
    w.u64(s.out_dim);
    w.u8(static_cast<std::uint8_t>(s.activation));
    w.u8(s.batch_norm_before ? 1 : 0);
    w.f64s(net.weights(k));
    w.f64s(net.bias(k));
    if (const auto& bn = net.batch_norm()[k]) {
      w.f64(bn->momentum);
      w.f64(bn->epsilon);
      w.f64s(bn->running_mean);
      w.f64s(bn->running_var);
    }
  }
  seal(w);
  return w.take();
}

Mlp deserialize(std::span<const std::uint8_t> bytes) {
  // Header checks come first so a wrong version is reported as such even
  // though the checksum would also fail on a hand-edited blob.
  ByteReader head(bytes);
  for (auto b : kMlpMagic)
    if (head.u8() != b) throw DecodeError("not a network blob (bad magic)");
  const auto version = head.u32();
  if (version != kMlpFormatVersion)
    throw DecodeError("unsupported network format version " + std::to_string(version));

  ByteReader r(unseal(bytes));
  r.u32();
  r.u32();
  const auto count = r.u32();
  std::vector<LayerSpec> specs;
  std::vector<double> params;
  std::vector<std::optional<BatchNormStats>> bn;
  for (std::uint32_t k = 0; k < count; ++k) {
    if (r.u32() != k) throw DecodeError("layer records out of order");
    LayerSpec s;
    s.in_dim = r.u64();
    s.out_dim = r.u64();
    const auto act = r.u8();
    if (act > static_cast<std::uint8_t>(Activation::softmax)) throw DecodeError("unknown activation tag");
    s.activation = static_cast<Activation>(act);
    s.batch_norm_before = r.u8() != 0;
    if (s.in_dim == 0 || s.out_dim == 0 || s.in_dim > (1u << 20) || s.out_dim > (1u << 20))
      throw DecodeError("implausible layer shape");
    auto w = r.f64s(s.in_dim * s.out_dim);
    auto b = r.f64s(s.out_dim);
    params.insert(params.end(), w.begin(), w.end());
    params.insert(params.end(), b.begin(), b.end());
    if (s.batch_norm_before) {
      BatchNormStats st;
      st.momentum = r.f64();
      st.epsilon = r.f64();
      st.running_mean = r.f64s(s.in_dim);
      st.running_var = r.f64s(s.in_dim);
      bn.emplace_back(std::move(st));
    } else {
      bn.emplace_back(std::nullopt);
    }
    specs.push_back(s);
  }
  if (r.remaining() != 0) throw DecodeError("trailing bytes after network record");
  try {
    return Mlp::from_state(std::move(specs), std::move(params), std::move(bn));
  } catch (const ShapeError& e) {
    throw DecodeError(std::string("inconsistent network record: ") + e.what());
  }
}

void write_adam(ByteWriter& w, const AdamState& s) {
  w.u64(s.step_count);
  w.f64(s.beta1);
  w.f64(s.beta2);
  w.f64(s.eps_hat);
  w.u64(s.first_moment.size());
  w.f64s(s.first_moment);
  w.f64s(s.second_moment);
}

AdamState read_adam(ByteReader& r) {
  AdamState s;
  s.step_count = r.u64();
  s.beta1 = r.f64();
  s.beta2 = r.f64();
  s.eps_hat = r.f64();
  const auto n = r.u64();
  s.first_moment = r.f64s(n);
  s.second_moment = r.f64s(n);
  return s;
}

}  // namespace tsc::net
