#include "cntuple/codec.hpp"

#include "cntuple/errors.hpp"

#include <zlib.h>

#include <string>

namespace cntuple {

bool codec_registered(std::uint16_t codec_id) {
  return codec_id == kCodecNone || codec_id == kCodecGeneral;
}

const char* codec_name(std::uint16_t codec_id) {
  switch (codec_id) {
    case kCodecNone: return "none";
    case kCodecGeneral: return "general";
    default: return "?";
  }
}

std::uint16_t codec_from_name(const std::string& name) {
  if (name == "none" || name == "0") return kCodecNone;
  if (name == "general" || name == "1") return kCodecGeneral;
  throw UsageError("unknown codec: " + name);
}

namespace {

void require_registered(std::uint16_t codec_id) {
  if (!codec_registered(codec_id)) {
    throw CorruptionError("unknown codec id " + std::to_string(codec_id));
  }
}

} // namespace

ByteBuffer compress(std::span<const std::byte> payload, std::uint16_t codec_id) {
  require_registered(codec_id);
  if (codec_id == kCodecNone) {
    return ByteBuffer(payload.begin(), payload.end());
  }
  uLong bound = compressBound(static_cast<uLong>(payload.size()));
  ByteBuffer out(bound);
  uLongf out_len = bound;
  int rc = ::compress2(reinterpret_cast<Bytef*>(out.data()), &out_len,
                       reinterpret_cast<const Bytef*>(payload.data()),
                       static_cast<uLong>(payload.size()), Z_DEFAULT_COMPRESSION);
  if (rc != Z_OK) {
    throw IoError("deflate failed with code " + std::to_string(rc));
  }
  out.resize(out_len);
  return out;
}

ByteBuffer decompress(std::span<const std::byte> stored, std::uint16_t codec_id,
                      std::uint64_t expected_size) {
  require_registered(codec_id);
  if (codec_id == kCodecNone) {
    if (stored.size() != expected_size) {
      throw CorruptionError("stored size " + std::to_string(stored.size()) +
                            " does not match expected " + std::to_string(expected_size));
    }
    return ByteBuffer(stored.begin(), stored.end());
  }
  ByteBuffer out(expected_size);
  uLongf out_len = static_cast<uLongf>(expected_size);
  int rc = ::uncompress(reinterpret_cast<Bytef*>(out.data()), &out_len,
                        reinterpret_cast<const Bytef*>(stored.data()),
                        static_cast<uLong>(stored.size()));
  if (rc != Z_OK) {
    throw CorruptionError("inflate failed with code " + std::to_string(rc));
  }
  if (out_len != expected_size) {
    throw CorruptionError("decompressed size " + std::to_string(out_len) +
                          " does not match expected " + std::to_string(expected_size));
  }
  return out;
}

} // namespace cntuple
