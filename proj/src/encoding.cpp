#include "cntuple/encoding.hpp"

#include <bit>
#include <string>

namespace cntuple {

namespace {

template <typename T>
struct wire_traits;

template <>
struct wire_traits<std::int32_t> {
  using wire = std::uint32_t;
};
template <>
struct wire_traits<std::int64_t> {
  using wire = std::uint64_t;
};
template <>
struct wire_traits<std::uint64_t> {
  using wire = std::uint64_t;
};
template <>
struct wire_traits<float> {
  using wire = std::uint32_t;
};
template <>
struct wire_traits<double> {
  using wire = std::uint64_t;
};

void check_length(std::uint64_t expected, std::uint64_t actual) {
  if (expected != actual) {
    throw CorruptionError("payload length mismatch: expected " +
                          std::to_string(expected) + " bytes, got " +
                          std::to_string(actual));
  }
}

} // namespace

template <typename T>
void encode_fixed_into(ByteBuffer& out, std::span<const T> values) {
  using W = typename wire_traits<T>::wire;
  std::size_t at = out.size();
  out.resize(at + values.size() * sizeof(W));
  for (T v : values) {
    put_le<W>(out.data() + at, std::bit_cast<W>(v));
    at += sizeof(W);
  }
}

template <typename T>
std::vector<T> decode_fixed(std::span<const std::byte> payload, std::uint64_t n) {
  using W = typename wire_traits<T>::wire;
  check_length(n * sizeof(W), payload.size());
  std::vector<T> values(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    values[i] = std::bit_cast<T>(get_le<W>(payload.data() + i * sizeof(W)));
  }
  return values;
}

template void encode_fixed_into<std::int32_t>(ByteBuffer&, std::span<const std::int32_t>);
template void encode_fixed_into<std::int64_t>(ByteBuffer&, std::span<const std::int64_t>);
template void encode_fixed_into<std::uint64_t>(ByteBuffer&, std::span<const std::uint64_t>);
template void encode_fixed_into<float>(ByteBuffer&, std::span<const float>);
template void encode_fixed_into<double>(ByteBuffer&, std::span<const double>);

template std::vector<std::int32_t> decode_fixed<std::int32_t>(std::span<const std::byte>, std::uint64_t);
template std::vector<std::int64_t> decode_fixed<std::int64_t>(std::span<const std::byte>, std::uint64_t);
template std::vector<std::uint64_t> decode_fixed<std::uint64_t>(std::span<const std::byte>, std::uint64_t);
template std::vector<float> decode_fixed<float>(std::span<const std::byte>, std::uint64_t);
template std::vector<double> decode_fixed<double>(std::span<const std::byte>, std::uint64_t);

void encode_packed_bools_into(ByteBuffer& out, std::span<const std::uint8_t> bools) {
  std::size_t at = out.size();
  out.resize(at + (bools.size() + 7) / 8, std::byte{0});
  for (std::size_t i = 0; i < bools.size(); ++i) {
    if (bools[i]) {
      out[at + i / 8] |= static_cast<std::byte>(1u << (i % 8));
    }
  }
}

std::vector<std::uint8_t> decode_packed_bools(std::span<const std::byte> payload,
                                              std::uint64_t n) {
  check_length((n + 7) / 8, payload.size());
  std::vector<std::uint8_t> bools(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    bools[i] = (std::to_integer<unsigned>(payload[i / 8]) >> (i % 8)) & 1u;
  }
  return bools;
}

std::uint64_t element_count(const ElementData& values) {
  return std::visit([](const auto& v) { return static_cast<std::uint64_t>(v.size()); },
                    values);
}

std::uint64_t encoded_size(PhysicalType type, std::uint64_t n_elements) {
  if (type == PhysicalType::kPackedBool) return (n_elements + 7) / 8;
  return n_elements * physical_width(type);
}

namespace {

template <typename T>
const std::vector<T>& expect_alternative(PhysicalType type, const ElementData& values) {
  const auto* v = std::get_if<std::vector<T>>(&values);
  if (v == nullptr) {
    throw UsageError(std::string("element type mismatch for column of ") +
                     physical_name(type));
  }
  return *v;
}

} // namespace

ByteBuffer encode_elements(PhysicalType type, const ElementData& values) {
  if (element_count(values) == 0) {
    throw UsageError("cannot encode an empty element slice");
  }
  ByteBuffer out;
  switch (type) {
    case PhysicalType::kInt32:
      encode_fixed_into<std::int32_t>(out, expect_alternative<std::int32_t>(type, values));
      break;
    case PhysicalType::kInt64:
      encode_fixed_into<std::int64_t>(out, expect_alternative<std::int64_t>(type, values));
      break;
    case PhysicalType::kFloat32:
      encode_fixed_into<float>(out, expect_alternative<float>(type, values));
      break;
    case PhysicalType::kFloat64:
      encode_fixed_into<double>(out, expect_alternative<double>(type, values));
      break;
    case PhysicalType::kPackedBool:
      encode_packed_bools_into(out, expect_alternative<std::uint8_t>(type, values));
      break;
    case PhysicalType::kIndex64:
      encode_fixed_into<std::uint64_t>(out, expect_alternative<std::uint64_t>(type, values));
      break;
  }
  return out;
}

ElementData decode_elements(PhysicalType type, std::span<const std::byte> payload,
                            std::uint64_t n_elements) {
  switch (type) {
    case PhysicalType::kInt32: return decode_fixed<std::int32_t>(payload, n_elements);
    case PhysicalType::kInt64: return decode_fixed<std::int64_t>(payload, n_elements);
    case PhysicalType::kFloat32: return decode_fixed<float>(payload, n_elements);
    case PhysicalType::kFloat64: return decode_fixed<double>(payload, n_elements);
    case PhysicalType::kPackedBool: return decode_packed_bools(payload, n_elements);
    case PhysicalType::kIndex64: return decode_fixed<std::uint64_t>(payload, n_elements);
  }
  throw CorruptionError("unknown physical type tag");
}

} // namespace cntuple
