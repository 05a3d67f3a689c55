#include "cntuple/object_store.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

namespace cntuple {

namespace fs = std::filesystem;

// ── Uuid ─────────────────────────────────────────────────────────────────────

Uuid Uuid::parse(const std::string& text) {
  if (text.size() != 36) {
    throw UriError("malformed UUID '" + text + "': expected 36 characters");
  }
  Uuid uuid;
  std::size_t out = 0;
  int nibble_hi = -1;
  for (std::size_t i = 0; i < 36; ++i) {
    char c = text[i];
    bool hyphen_slot = (i == 8 || i == 13 || i == 18 || i == 23);
    if (hyphen_slot) {
      if (c != '-') throw UriError("malformed UUID '" + text + "': missing hyphen");
      continue;
    }
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = 10 + (c - 'a');
    else if (c >= 'A' && c <= 'F') v = 10 + (c - 'A');
    else throw UriError("malformed UUID '" + text + "': bad hex digit");
    if (nibble_hi < 0) {
      nibble_hi = v;
    } else {
      uuid.bytes[out++] = static_cast<std::uint8_t>((nibble_hi << 4) | v);
      nibble_hi = -1;
    }
  }
  return uuid;
}

std::string Uuid::str() const {
  char buf[37];
  std::snprintf(buf, sizeof(buf),
                "%02x%02x%02x%02x-%02x%02x-%02x%02x-%02x%02x-%02x%02x%02x%02x%02x%02x",
                bytes[0], bytes[1], bytes[2], bytes[3], bytes[4], bytes[5], bytes[6],
                bytes[7], bytes[8], bytes[9], bytes[10], bytes[11], bytes[12], bytes[13],
                bytes[14], bytes[15]);
  return buf;
}

// ── ObjectClass / placement ──────────────────────────────────────────────────

ObjectClass ObjectClass::rp_xsf(std::uint32_t replicas) {
  if (replicas < 2) {
    throw UsageError("RP_XSF needs at least 2 replicas");
  }
  return {Kind::kRpXsf, replicas};
}

ObjectClass object_class_from_name(const std::string& name, std::uint32_t n_targets) {
  if (name == "sx") return ObjectClass::sx();
  if (name == "rp-xsf" || name == "rp_xsf") {
    if (n_targets < 2) {
      throw UsageError("RP_XSF requires a pool with at least 2 targets");
    }
    return ObjectClass::rp_xsf(n_targets); // replicate across the whole pool
  }
  throw UsageError("unknown object class: " + name);
}

std::string object_class_name(const ObjectClass& objclass) {
  return objclass.kind == ObjectClass::Kind::kSX ? "sx" : "rp-xsf";
}

std::vector<std::uint32_t> placement(const ObjectKey& key, const ObjectClass& objclass,
                                     std::uint32_t n_targets) {
  if (n_targets == 0) throw UsageError("pool with zero targets");
  std::uint32_t first = static_cast<std::uint32_t>(placement_hash(key.oid, key.dkey) % n_targets);
  if (objclass.kind == ObjectClass::Kind::kSX) {
    return {first};
  }
  if (objclass.replicas > n_targets) {
    throw UsageError("replica count exceeds pool targets");
  }
  std::vector<std::uint32_t> targets(objclass.replicas);
  for (std::uint32_t i = 0; i < objclass.replicas; ++i) {
    targets[i] = (first + i) % n_targets;
  }
  return targets;
}

// ── PoolConfig ───────────────────────────────────────────────────────────────

void PoolConfig::validate() const {
  if (n_targets < 1) throw UsageError("pool needs at least one target");
  if (bandwidth_bytes_per_s <= 0 || latency_s <= 0) {
    throw UsageError("pool bandwidth and latency must be positive");
  }
}

PoolConfig parse_pool_config_text(const std::string& text) {
  PoolConfig config;
  std::istringstream in(text);
  std::string line;
  auto trim = [](std::string s) {
    auto sp = [](unsigned char c) { return std::isspace(c); };
    while (!s.empty() && sp(s.front())) s.erase(s.begin());
    while (!s.empty() && sp(s.back())) s.pop_back();
    return s;
  };
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("pool config line without '=': " + line);
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "n_targets") {
        config.n_targets = static_cast<std::uint32_t>(std::stoul(value));
      } else if (key == "latency_us") {
        config.latency_s = std::stod(value) * 1e-6;
      } else if (key == "bandwidth_mbps") {
        config.bandwidth_bytes_per_s = std::stod(value) * 1000.0 * 1000.0;
      } else if (key == "snapshot_dir") {
        config.snapshot_dir = value;
      } else {
        throw UsageError("unknown pool config key: " + key);
      }
    } catch (const std::invalid_argument&) {
      throw UsageError("bad value for pool config key " + key + ": " + value);
    }
  }
  config.validate();
  return config;
}

PoolConfig load_pool_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pool config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_pool_config_text(buf.str());
}

// ── SimContainer ─────────────────────────────────────────────────────────────

SimContainer::SimContainer(Uuid uuid, std::shared_ptr<const PoolConfig> pool_config)
    : uuid_(uuid), pool_config_(std::move(pool_config)) {}

CostReport SimContainer::charge(
    const std::vector<std::pair<std::uint32_t, std::uint64_t>>& target_work) {
  CostReport report;
  report.per_target_bytes.assign(pool_config_->n_targets, 0);
  report.per_target_ops.assign(pool_config_->n_targets, 0);
  for (const auto& [target, bytes] : target_work) {
    report.per_target_ops[target] += 1;
    report.per_target_bytes[target] += bytes;
  }
  double elapsed = 0.0;
  for (std::uint32_t t = 0; t < pool_config_->n_targets; ++t) {
    double busy = static_cast<double>(report.per_target_ops[t]) * pool_config_->latency_s +
                  static_cast<double>(report.per_target_bytes[t]) /
                      pool_config_->bandwidth_bytes_per_s;
    elapsed = std::max(elapsed, busy);
  }
  report.simulated_elapsed = elapsed;
  clock_ += elapsed;
  return report;
}

void SimContainer::update(const ObjectKey& key, ByteBuffer value, ObjectClass objclass) {
  std::lock_guard lock(mutex_);
  Entry entry;
  entry.objclass = objclass;
  entry.replicas = placement(key, objclass, pool_config_->n_targets);
  std::uint64_t size = value.size();
  entry.value = std::move(value);
  std::vector<std::pair<std::uint32_t, std::uint64_t>> work;
  work.reserve(entry.replicas.size());
  for (std::uint32_t t : entry.replicas) work.emplace_back(t, size);
  objects_[key] = std::move(entry); // last writer wins
  charge(work);
}

ByteBuffer SimContainer::fetch(const ObjectKey& key) {
  std::lock_guard lock(mutex_);
  auto it = objects_.find(key);
  if (it == objects_.end()) {
    throw NotFoundError("fetch of absent key: " + key.str());
  }
  Entry& entry = it->second;
  std::uint32_t replica = entry.replicas[entry.next_replica % entry.replicas.size()];
  ++entry.next_replica;
  charge({{replica, entry.value.size()}});
  return entry.value;
}

bool SimContainer::contains(const ObjectKey& key) const {
  std::lock_guard lock(mutex_);
  return objects_.count(key) != 0;
}

namespace {

void reject_duplicates(const std::vector<IoDescriptor>& descriptors) {
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    for (std::size_t j = i + 1; j < descriptors.size(); ++j) {
      if (descriptors[i].key == descriptors[j].key) {
        throw UsageError("duplicate key in one batch: " + descriptors[i].key.str());
      }
    }
  }
}

} // namespace

std::vector<ByteBuffer> SimContainer::read_v(const std::vector<IoDescriptor>& descriptors,
                                             CostReport* cost) {
  std::lock_guard lock(mutex_);
  reject_duplicates(descriptors);
  // Validate the whole batch before touching any state.
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    if (descriptors[i].direction != IoDescriptor::Direction::kFetch) {
      throw UsageError("read_v batch contains an update descriptor");
    }
    if (objects_.find(descriptors[i].key) == objects_.end()) {
      throw NotFoundError("read_v descriptor #" + std::to_string(i) +
                          " names an absent key: " + descriptors[i].key.str());
    }
  }
  std::vector<ByteBuffer> results;
  results.reserve(descriptors.size());
  std::vector<std::pair<std::uint32_t, std::uint64_t>> work;
  work.reserve(descriptors.size());
  for (const IoDescriptor& d : descriptors) {
    Entry& entry = objects_.find(d.key)->second;
    std::uint32_t replica = entry.replicas[entry.next_replica % entry.replicas.size()];
    ++entry.next_replica;
    work.emplace_back(replica, entry.value.size());
    results.push_back(entry.value);
  }
  CostReport report = charge(work);
  if (cost != nullptr) *cost = std::move(report);
  return results;
}

void SimContainer::write_v(std::vector<IoDescriptor> descriptors, CostReport* cost,
                           ObjectClass objclass) {
  std::lock_guard lock(mutex_);
  reject_duplicates(descriptors);
  for (const IoDescriptor& d : descriptors) {
    if (d.direction != IoDescriptor::Direction::kUpdate) {
      throw UsageError("write_v batch contains a fetch descriptor");
    }
    if (d.payload.empty()) {
      throw UsageError("write_v descriptor with empty payload: " + d.key.str());
    }
  }
  std::vector<std::pair<std::uint32_t, std::uint64_t>> work;
  for (IoDescriptor& d : descriptors) {
    Entry entry;
    entry.objclass = objclass;
    entry.replicas = placement(d.key, objclass, pool_config_->n_targets);
    std::uint64_t size = d.payload.size();
    entry.value = std::move(d.payload);
    for (std::uint32_t t : entry.replicas) work.emplace_back(t, size);
    objects_[d.key] = std::move(entry);
  }
  CostReport report = charge(work);
  if (cost != nullptr) *cost = std::move(report);
}

double SimContainer::simulated_seconds() const {
  std::lock_guard lock(mutex_);
  return clock_;
}

std::vector<std::uint32_t> SimContainer::replicas_of(const ObjectKey& key) const {
  std::lock_guard lock(mutex_);
  auto it = objects_.find(key);
  if (it == objects_.end()) throw NotFoundError("replicas_of absent key: " + key.str());
  return it->second.replicas;
}

std::size_t SimContainer::object_count() const {
  std::lock_guard lock(mutex_);
  return objects_.size();
}

// ── Snapshot persistence ─────────────────────────────────────────────────────
// Layout (version 1):
//   <dir>/snapshot.idx            CSNI, version, oid count, oid list
//   <dir>/o_<hi><lo>.bin          CSNO, version, entry count,
//                                 entries: dkey, akey, class kind, replicas,
//                                 value length, value bytes

namespace {

constexpr char kIndexMagic[4] = {'C', 'S', 'N', 'I'};
constexpr char kObjectMagic[4] = {'C', 'S', 'N', 'O'};
constexpr std::uint32_t kSnapshotVersion = 1;

std::string oid_filename(const Oid& oid) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "o_%016llx%016llx.bin",
                static_cast<unsigned long long>(oid.hi),
                static_cast<unsigned long long>(oid.lo));
  return buf;
}

void write_file(const fs::path& path, const ByteBuffer& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create snapshot file '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("short write to snapshot file '" + path.string() + "'");
}

ByteBuffer read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open snapshot file '" + path.string() + "'");
  auto size = in.tellg();
  in.seekg(0);
  ByteBuffer data(static_cast<std::size_t>(size));
  in.read(reinterpret_cast<char*>(data.data()), size);
  if (!in) throw IoError("short read from snapshot file '" + path.string() + "'");
  return data;
}

void check_magic(ByteReader& r, const char expected[4], const char* what) {
  auto magic = r.raw(4);
  if (std::memcmp(magic.data(), expected, 4) != 0) {
    throw CorruptionError(std::string("bad magic in snapshot ") + what);
  }
  std::uint32_t version = r.u32();
  if (version != kSnapshotVersion) {
    throw CorruptionError("unknown snapshot version " + std::to_string(version));
  }
}

} // namespace

void SimContainer::persist(const std::string& dir) const {
  std::lock_guard lock(mutex_);
  fs::create_directories(dir);

  std::vector<Oid> oids;
  auto it = objects_.begin();
  while (it != objects_.end()) {
    Oid oid = it->first.oid;
    oids.push_back(oid);
    ByteBuffer data;
    ByteWriter w(data);
    w.bytes(std::span<const std::byte>(reinterpret_cast<const std::byte*>(kObjectMagic), 4));
    w.u32(kSnapshotVersion);
    auto first = it;
    std::uint64_t count = 0;
    for (; it != objects_.end() && it->first.oid == oid; ++it) ++count;
    w.u64(count);
    for (auto e = first; e != it; ++e) {
      w.u64(e->first.dkey);
      w.u64(e->first.akey);
      w.u8(static_cast<std::uint8_t>(e->second.objclass.kind));
      w.u32(e->second.objclass.replicas);
      w.u64(e->second.value.size());
      w.bytes(e->second.value);
    }
    write_file(fs::path(dir) / oid_filename(oid), data);
  }

  ByteBuffer index;
  ByteWriter w(index);
  w.bytes(std::span<const std::byte>(reinterpret_cast<const std::byte*>(kIndexMagic), 4));
  w.u32(kSnapshotVersion);
  w.u64(oids.size());
  for (const Oid& oid : oids) {
    w.u64(oid.hi);
    w.u64(oid.lo);
  }
  write_file(fs::path(dir) / "snapshot.idx", index);
}

void SimContainer::restore(const std::string& dir) {
  std::lock_guard lock(mutex_);
  fs::path index_path = fs::path(dir) / "snapshot.idx";
  std::map<ObjectKey, Entry> restored;
  if (fs::exists(index_path)) {
    ByteBuffer index = read_file(index_path);
    ByteReader r(index);
    check_magic(r, kIndexMagic, "index");
    std::uint64_t n_oids = r.u64();
    for (std::uint64_t i = 0; i < n_oids; ++i) {
      Oid oid{r.u64(), r.u64()};
      ByteBuffer data = read_file(fs::path(dir) / oid_filename(oid));
      ByteReader or_(data);
      check_magic(or_, kObjectMagic, "object file");
      std::uint64_t count = or_.u64();
      for (std::uint64_t e = 0; e < count; ++e) {
        ObjectKey key;
        key.oid = oid;
        key.dkey = or_.u64();
        key.akey = or_.u64();
        Entry entry;
        auto kind = or_.u8();
        if (kind > 1) throw CorruptionError("unknown object class tag in snapshot");
        entry.objclass.kind = static_cast<ObjectClass::Kind>(kind);
        entry.objclass.replicas = or_.u32();
        entry.replicas = placement(key, entry.objclass, pool_config_->n_targets);
        std::uint64_t len = or_.u64();
        auto bytes = or_.raw(len);
        entry.value.assign(bytes.begin(), bytes.end());
        restored[key] = std::move(entry);
      }
    }
  } else if (!fs::exists(dir)) {
    throw IoError("snapshot directory '" + dir + "' does not exist");
  }
  // Missing index in an existing but empty directory restores an empty
  // container.
  objects_ = std::move(restored);
}

// ── SimPool / SimStore ───────────────────────────────────────────────────────

SimPool::SimPool(PoolConfig config) {
  config.validate();
  config_ = std::make_shared<const PoolConfig>(std::move(config));
}

std::shared_ptr<SimContainer> SimPool::open_container(const Uuid& uuid) {
  std::lock_guard lock(mutex_);
  auto it = containers_.find(uuid);
  if (it != containers_.end()) return it->second;
  auto container = std::make_shared<SimContainer>(uuid, config_);
  containers_[uuid] = container;
  return container;
}

std::shared_ptr<SimPool> SimStore::create_pool(const PoolConfig& config) {
  std::lock_guard lock(mutex_);
  auto it = pools_.find(config.uuid);
  if (it != pools_.end()) return it->second;
  auto pool = std::make_shared<SimPool>(config);
  pools_[config.uuid] = pool;
  return pool;
}

std::shared_ptr<SimPool> SimStore::connect_pool(const Uuid& uuid) {
  std::lock_guard lock(mutex_);
  auto it = pools_.find(uuid);
  if (it == pools_.end()) {
    throw NotFoundError("unknown pool uuid " + uuid.str());
  }
  return it->second;
}

bool SimStore::has_pool(const Uuid& uuid) const {
  std::lock_guard lock(mutex_);
  return pools_.count(uuid) != 0;
}

} // namespace cntuple
