#include "cntuple/object_key.hpp"

#include <cstdio>

namespace cntuple {

std::string ObjectKey::str() const {
  char buf[80];
  std::snprintf(buf, sizeof(buf), "oid=%016llx%016llx dkey=%llu akey=%llu",
                static_cast<unsigned long long>(oid.hi),
                static_cast<unsigned long long>(oid.lo),
                static_cast<unsigned long long>(dkey),
                static_cast<unsigned long long>(akey));
  return buf;
}

std::uint64_t placement_hash(const Oid& oid, std::uint64_t dkey) {
  std::uint64_t h = kFnvOffset;
  h = fnv1a64_u64(oid.hi, h);
  h = fnv1a64_u64(oid.lo, h);
  h = fnv1a64_u64(dkey, h);
  return h;
}

} // namespace cntuple
