#pragma once

#include "cntuple/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace cntuple {

using ByteBuffer = std::vector<std::byte>;

// ── Little-endian primitives ─────────────────────────────────────────────────
// All on-disk and on-wire integers are little-endian, independent of host
// byte order.

template <typename T>
  requires std::is_unsigned_v<T>
inline void put_le(std::byte* dst, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    dst[i] = static_cast<std::byte>((value >> (8 * i)) & 0xff);
  }
}

template <typename T>
  requires std::is_unsigned_v<T>
inline T get_le(const std::byte* src) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(std::to_integer<std::uint8_t>(src[i])) << (8 * i);
  }
  return value;
}

// ── FNV-1a 64 ────────────────────────────────────────────────────────────────

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a64(std::span<const std::byte> data,
                             std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (std::byte b : data) {
    h ^= std::to_integer<std::uint64_t>(b);
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a64_u64(std::uint64_t value, std::uint64_t seed) {
  std::byte buf[8];
  put_le<std::uint64_t>(buf, value);
  return fnv1a64(std::span<const std::byte>(buf, 8), seed);
}

// ── Cursor-style writer/reader for the binary metadata sections ─────────────

class ByteWriter {
public:
  explicit ByteWriter(ByteBuffer& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(static_cast<std::byte>(v)); }
  void u16(std::uint16_t v) { append(v); }
  void u32(std::uint32_t v) { append(v); }
  void u64(std::uint64_t v) { append(v); }

  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void bytes(std::span<const std::byte> data) {
    out_.insert(out_.end(), data.begin(), data.end());
  }

  // Length-prefixed (u32) string.
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(),
                reinterpret_cast<const std::byte*>(s.data()),
                reinterpret_cast<const std::byte*>(s.data() + s.size()));
  }

private:
  template <typename T>
  void append(T v) {
    std::byte buf[sizeof(T)];
    put_le<T>(buf, v);
    out_.insert(out_.end(), buf, buf + sizeof(T));
  }

  ByteBuffer& out_;
};

class ByteReader {
public:
  explicit ByteReader(std::span<const std::byte> data) : data_(data) {}

  std::uint8_t u8() { return std::to_integer<std::uint8_t>(take(1)[0]); }
  std::uint16_t u16() { return get_le<std::uint16_t>(take(2).data()); }
  std::uint32_t u32() { return get_le<std::uint32_t>(take(4).data()); }
  std::uint64_t u64() { return get_le<std::uint64_t>(take(8).data()); }

  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  std::string str() {
    std::uint32_t n = u32();
    auto s = take(n);
    return std::string(reinterpret_cast<const char*>(s.data()), s.size());
  }

  std::span<const std::byte> raw(std::size_t n) { return take(n); }

  std::size_t remaining() const { return data_.size() - pos_; }

private:
  std::span<const std::byte> take(std::size_t n) {
    if (pos_ + n > data_.size()) {
      throw CorruptionError("truncated record: need " + std::to_string(n) +
                            " bytes, " + std::to_string(remaining()) + " left");
    }
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::span<const std::byte> data_;
  std::size_t pos_ = 0;
};

} // namespace cntuple
