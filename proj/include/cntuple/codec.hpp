#pragma once

#include "cntuple/bytes.hpp"

#include <cstdint>
#include <span>

namespace cntuple {

// Registered page codecs. 0 is the identity; 1 is a general-purpose lossless
// codec (deflate). Files record the codec id per page so readers can reject
// streams they do not understand.
inline constexpr std::uint16_t kCodecNone = 0;
inline constexpr std::uint16_t kCodecGeneral = 1;

bool codec_registered(std::uint16_t codec_id);
const char* codec_name(std::uint16_t codec_id);

// Parses "none" / "general" (also accepts the numeric id).
std::uint16_t codec_from_name(const std::string& name);

// Lossless round trip: decompress(compress(x, c), c, x.size()) == x.
// compress may expand incompressible input. Throws CorruptionError on an
// unknown codec, a corrupt stream, or an output size mismatch.
ByteBuffer compress(std::span<const std::byte> payload, std::uint16_t codec_id);
ByteBuffer decompress(std::span<const std::byte> stored, std::uint16_t codec_id,
                      std::uint64_t expected_size);

} // namespace cntuple
