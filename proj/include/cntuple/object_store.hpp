#pragma once

#include "cntuple/bytes.hpp"
#include "cntuple/errors.hpp"
#include "cntuple/object_key.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace cntuple {

struct Uuid {
  std::array<std::uint8_t, 16> bytes{};

  static Uuid parse(const std::string& text); // RFC-4122 textual form
  std::string str() const;                    // canonical lowercase

  friend auto operator<=>(const Uuid&, const Uuid&) = default;
};

// Placement / replication policy. SX spreads single copies across all
// targets; RP_XSF keeps `replicas` copies so fetches can scale out.
struct ObjectClass {
  enum class Kind : std::uint8_t { kSX = 0, kRpXsf = 1 };

  Kind kind = Kind::kSX;
  std::uint32_t replicas = 1;

  static ObjectClass sx() { return {Kind::kSX, 1}; }
  static ObjectClass rp_xsf(std::uint32_t replicas);

  friend bool operator==(const ObjectClass&, const ObjectClass&) = default;
};

ObjectClass object_class_from_name(const std::string& name, std::uint32_t n_targets);
std::string object_class_name(const ObjectClass& objclass);

struct PoolConfig {
  Uuid uuid;
  std::uint32_t n_targets = 8;
  double bandwidth_bytes_per_s = 2000.0 * 1000 * 1000; // per target
  double latency_s = 20e-6;                            // per op
  std::string snapshot_dir;                            // CLI persistence root, optional

  void validate() const;
};

// key=value text file: n_targets, latency_us, bandwidth_mbps, snapshot_dir.
PoolConfig parse_pool_config_text(const std::string& text);
PoolConfig load_pool_config(const std::string& path);

// Deterministic target choice. SX: one target, placement_hash(oid,dkey) mod n.
// RP_XSF: `replicas` consecutive distinct targets starting there. The akey
// never affects placement.
std::vector<std::uint32_t> placement(const ObjectKey& key, const ObjectClass& objclass,
                                     std::uint32_t n_targets);

struct IoDescriptor {
  enum class Direction : std::uint8_t { kFetch = 0, kUpdate = 1 };

  ObjectKey key;
  Direction direction = Direction::kFetch;
  ByteBuffer payload;       // update only
  std::uint64_t size = 0;   // fetch: expected value size filled by the store
};

// Outcome of one simulated batch: each target serially services its share,
// the batch finishes when the slowest target does.
struct CostReport {
  double simulated_elapsed = 0.0;
  std::vector<std::uint64_t> per_target_bytes;
  std::vector<std::uint64_t> per_target_ops;
};

class SimPool;

// One container's key-addressed object space. Thread-safe; per-key updates
// are atomic, cost accounting is serialized.
class SimContainer {
public:
  SimContainer(Uuid uuid, std::shared_ptr<const PoolConfig> pool_config);

  const Uuid& uuid() const { return uuid_; }
  const PoolConfig& pool_config() const { return *pool_config_; }

  void update(const ObjectKey& key, ByteBuffer value, ObjectClass objclass = ObjectClass::sx());
  ByteBuffer fetch(const ObjectKey& key);
  bool contains(const ObjectKey& key) const;

  // Batched vector I/O. Results are identical to a sequential loop in
  // descriptor order; duplicate keys in one batch are rejected and a fetch of
  // an absent key fails the whole batch naming the descriptor.
  std::vector<ByteBuffer> read_v(const std::vector<IoDescriptor>& descriptors,
                                 CostReport* cost = nullptr);
  void write_v(std::vector<IoDescriptor> descriptors, CostReport* cost = nullptr,
               ObjectClass objclass = ObjectClass::sx());

  // Simulated wall clock: total elapsed over all operations so far.
  double simulated_seconds() const;

  // Replica set assigned to a stored key (introspection for tests/benchmarks).
  std::vector<std::uint32_t> replicas_of(const ObjectKey& key) const;
  std::size_t object_count() const;

  // Directory snapshot: an index file plus one file per OID with its keyed
  // entries. restore() replaces the container contents.
  void persist(const std::string& dir) const;
  void restore(const std::string& dir);

private:
  struct Entry {
    ByteBuffer value;
    ObjectClass objclass;
    std::vector<std::uint32_t> replicas;
    std::uint32_t next_replica = 0; // round-robin fetch choice
  };

  CostReport charge(const std::vector<std::pair<std::uint32_t, std::uint64_t>>& target_work);

  Uuid uuid_;
  std::shared_ptr<const PoolConfig> pool_config_;
  mutable std::mutex mutex_;
  std::map<ObjectKey, Entry> objects_;
  double clock_ = 0.0;
};

class SimPool {
public:
  explicit SimPool(PoolConfig config);

  const PoolConfig& config() const { return *config_; }

  // Containers are auto-created on first open; reopening yields the same
  // underlying object space.
  std::shared_ptr<SimContainer> open_container(const Uuid& uuid);

private:
  std::shared_ptr<const PoolConfig> config_;
  std::mutex mutex_;
  std::map<Uuid, std::shared_ptr<SimContainer>> containers_;
};

// Process-local registry of simulated pools.
class SimStore {
public:
  std::shared_ptr<SimPool> create_pool(const PoolConfig& config);
  std::shared_ptr<SimPool> connect_pool(const Uuid& uuid); // throws on unknown uuid
  bool has_pool(const Uuid& uuid) const;

private:
  mutable std::mutex mutex_;
  std::map<Uuid, std::shared_ptr<SimPool>> pools_;
};

} // namespace cntuple
