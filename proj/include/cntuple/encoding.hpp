#pragma once

#include "cntuple/bytes.hpp"
#include "cntuple/schema.hpp"

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace cntuple {

// Decoded elements of one column. Bools are carried as uint8_t (0/1) so that
// ranges stay contiguous; Index64 elements are the uint64 alternative.
using ElementData = std::variant<std::vector<std::int32_t>,
                                 std::vector<std::int64_t>,
                                 std::vector<float>,
                                 std::vector<double>,
                                 std::vector<std::uint8_t>,
                                 std::vector<std::uint64_t>>;

std::uint64_t element_count(const ElementData& values);

// Expected payload length of n elements before compression:
// ceil(n/8) for PackedBool, n * width otherwise.
std::uint64_t encoded_size(PhysicalType type, std::uint64_t n_elements);

// Serializes elements little-endian (PackedBool: LSB-first, 8 per octet,
// final octet zero-padded). Throws UsageError on an empty slice or if the
// variant alternative does not match the physical type.
ByteBuffer encode_elements(PhysicalType type, const ElementData& values);

// Inverse of encode_elements. Throws CorruptionError if the payload length
// is inconsistent with n_elements.
ElementData decode_elements(PhysicalType type, std::span<const std::byte> payload,
                            std::uint64_t n_elements);

// Typed fixed-width helpers used by the column buffers and views.
template <typename T>
void encode_fixed_into(ByteBuffer& out, std::span<const T> values);
template <typename T>
std::vector<T> decode_fixed(std::span<const std::byte> payload, std::uint64_t n);

void encode_packed_bools_into(ByteBuffer& out, std::span<const std::uint8_t> bools);
std::vector<std::uint8_t> decode_packed_bools(std::span<const std::byte> payload,
                                              std::uint64_t n);

// Splits variable-length entries into an end-offset index column and a
// flattened value column: index[i] = total number of values in entries[0..i].
template <typename T>
std::pair<std::vector<std::uint64_t>, std::vector<T>>
shred_vector(const std::vector<std::vector<T>>& entries) {
  std::vector<std::uint64_t> index;
  std::vector<T> values;
  index.reserve(entries.size());
  for (const auto& entry : entries) {
    values.insert(values.end(), entry.begin(), entry.end());
    index.push_back(values.size());
  }
  return {std::move(index), std::move(values)};
}

template <typename T>
std::vector<std::vector<T>>
unshred_vector(std::span<const std::uint64_t> index, std::span<const T> values) {
  std::vector<std::vector<T>> entries;
  entries.reserve(index.size());
  std::uint64_t start = 0;
  for (std::uint64_t end : index) {
    if (end < start || end > values.size()) {
      throw CorruptionError("index column offsets out of order or out of range");
    }
    entries.emplace_back(values.begin() + start, values.begin() + end);
    start = end;
  }
  return entries;
}

} // namespace cntuple
