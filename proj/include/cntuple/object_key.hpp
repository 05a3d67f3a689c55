#pragma once

#include "cntuple/bytes.hpp"

#include <compare>
#include <cstdint>
#include <string>

namespace cntuple {

// 128-bit object identifier.
struct Oid {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  friend auto operator<=>(const Oid&, const Oid&) = default;
};

// Addresses one value inside a container: object id, distribution key
// (decides target co-location) and attribute key (sub-addressing).
struct ObjectKey {
  Oid oid;
  std::uint64_t dkey = 0;
  std::uint64_t akey = 0;

  friend auto operator<=>(const ObjectKey&, const ObjectKey&) = default;

  std::string str() const;
};

// Stable 64-bit placement hash over (oid, dkey); the akey intentionally does
// not participate so all akeys of a dkey land on the same target.
std::uint64_t placement_hash(const Oid& oid, std::uint64_t dkey);

} // namespace cntuple
