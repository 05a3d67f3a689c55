#include "cntuple/daos_backend.hpp"

#include <cstring>
#include <utility>

namespace cntuple {

// ── URI ──────────────────────────────────────────────────────────────────────

namespace {

constexpr char kScheme[] = "daos://";

std::uint32_t parse_rank(const std::string& text) {
  if (text.empty()) throw UriError("empty service rank");
  std::uint64_t value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw UriError("non-numeric service rank '" + text + "'");
    value = value * 10 + static_cast<std::uint64_t>(c - '0');
    if (value > 0xffffffffULL) throw UriError("service rank out of range '" + text + "'");
  }
  return static_cast<std::uint32_t>(value);
}

} // namespace

bool is_daos_uri(const std::string& location) {
  return location.rfind(kScheme, 0) == 0;
}

DaosUri parse_daos_uri(const std::string& text) {
  if (!is_daos_uri(text)) {
    throw UriError("URI must start with daos://");
  }
  std::string rest = text.substr(std::strlen(kScheme));
  auto colon = rest.find(':');
  if (colon == std::string::npos) {
    throw UriError("URI missing ':' after the pool UUID");
  }
  auto slash = rest.find('/', colon + 1);
  if (slash == std::string::npos) {
    throw UriError("URI missing '/' before the container UUID");
  }
  DaosUri uri;
  uri.pool_uuid = Uuid::parse(rest.substr(0, colon));
  std::string ranks = rest.substr(colon + 1, slash - colon - 1);
  if (ranks.empty()) {
    throw UriError("URI has an empty service rank list");
  }
  std::size_t start = 0;
  while (true) {
    auto sep = ranks.find('_', start);
    std::string part = ranks.substr(start, sep == std::string::npos ? std::string::npos
                                                                    : sep - start);
    uri.svc_ranks.push_back(parse_rank(part));
    if (sep == std::string::npos) break;
    start = sep + 1;
  }
  uri.container_uuid = Uuid::parse(rest.substr(slash + 1));
  return uri;
}

std::string format_daos_uri(const DaosUri& uri) {
  std::string out = kScheme + uri.pool_uuid.str() + ":";
  for (std::size_t i = 0; i < uri.svc_ranks.size(); ++i) {
    if (i > 0) out += '_';
    out += std::to_string(uri.svc_ranks[i]);
  }
  out += '/';
  out += uri.container_uuid.str();
  return out;
}

// ── Mapping ──────────────────────────────────────────────────────────────────

MappingStrategy mapping_from_name(const std::string& name) {
  if (name == "page") return MappingStrategy::kOidPerPage;
  if (name == "cluster") return MappingStrategy::kOidPerCluster;
  if (name == "akey") return MappingStrategy::kAkeyPerPage;
  throw UsageError("unknown mapping strategy: " + name);
}

const char* mapping_name(MappingStrategy strategy) {
  switch (strategy) {
    case MappingStrategy::kOidPerPage: return "page";
    case MappingStrategy::kOidPerCluster: return "cluster";
    case MappingStrategy::kAkeyPerPage: return "akey";
  }
  return "?";
}

ObjectKey keys_for_page(MappingStrategy strategy, const PagePlacement& page) {
  switch (strategy) {
    case MappingStrategy::kOidPerPage:
      return {{kPageOidHi, page.global_page_seq}, 0, 0};
    case MappingStrategy::kOidPerCluster:
      return {{kPageOidHi, page.cluster_id}, page.page_seq_in_cluster, 0};
    case MappingStrategy::kAkeyPerPage:
      return {{kPageOidHi, page.cluster_id}, page.column_id, page.page_seq_in_column};
  }
  throw UsageError("unknown mapping strategy");
}

// ── DaosAnchor ───────────────────────────────────────────────────────────────

ByteBuffer DaosAnchor::serialize() const {
  ByteBuffer out;
  ByteWriter w(out);
  w.bytes(std::span<const std::byte>(reinterpret_cast<const std::byte*>("CNTP"), 4));
  w.u32(format_version);
  w.u8(static_cast<std::uint8_t>(strategy));
  w.u8(static_cast<std::uint8_t>(objclass.kind));
  w.u32(objclass.replicas);
  w.u64(header_size_stored);
  w.u64(header_size_uncompressed);
  w.u64(footer_size_stored);
  w.u64(footer_size_uncompressed);
  w.u16(header_codec_id);
  w.u16(footer_codec_id);
  return out;
}

DaosAnchor DaosAnchor::deserialize(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  auto magic = r.raw(4);
  if (std::memcmp(magic.data(), "CNTP", 4) != 0) {
    throw CorruptionError("not a dataset: bad anchor object magic");
  }
  DaosAnchor a;
  a.format_version = r.u32();
  if (a.format_version != kFormatVersion) {
    throw CorruptionError("unknown format version " + std::to_string(a.format_version));
  }
  auto strategy = r.u8();
  if (strategy > 2) throw CorruptionError("unknown mapping strategy tag");
  a.strategy = static_cast<MappingStrategy>(strategy);
  auto kind = r.u8();
  if (kind > 1) throw CorruptionError("unknown object class tag");
  a.objclass.kind = static_cast<ObjectClass::Kind>(kind);
  a.objclass.replicas = r.u32();
  a.header_size_stored = r.u64();
  a.header_size_uncompressed = r.u64();
  a.footer_size_stored = r.u64();
  a.footer_size_uncompressed = r.u64();
  a.header_codec_id = r.u16();
  a.footer_codec_id = r.u16();
  if (a.header_size_stored == 0 || a.footer_size_stored == 0) {
    throw CorruptionError("anchor object with empty header or footer section");
  }
  return a;
}

// ── DaosSink ─────────────────────────────────────────────────────────────────

DaosSink::DaosSink(std::shared_ptr<SimContainer> container, DaosSinkOptions options)
    : StagedSink(options.codec_id), container_(std::move(container)), options_(options) {
  anchor_.strategy = options_.strategy;
  anchor_.objclass = options_.objclass;
}

PageLocator DaosSink::write_page(const PageAddress& address, ByteBuffer stored) {
  PagePlacement placement;
  placement.cluster_id = address.cluster_id;
  placement.page_seq_in_cluster = address.page_seq_in_cluster;
  placement.global_page_seq = address.global_page_seq;
  placement.column_id = address.column_id;
  placement.page_seq_in_column = address.page_seq_in_column;
  ObjectKey key = keys_for_page(options_.strategy, placement);

  PageLocator locator;
  locator.where = ObjectRegion{key, stored.size()};
  if (options_.batched_cluster_writes) {
    staged_.push_back(IoDescriptor{key, IoDescriptor::Direction::kUpdate,
                                   std::move(stored), 0});
  } else {
    container_->update(key, std::move(stored), options_.objclass);
  }
  return locator;
}

void DaosSink::on_commit_cluster() {
  if (!staged_.empty()) {
    container_->write_v(std::move(staged_), nullptr, options_.objclass);
    staged_.clear();
  }
}

void DaosSink::write_metadata(ByteBuffer header_stored, std::uint64_t header_uncompressed,
                              ByteBuffer footer_stored, std::uint64_t footer_uncompressed) {
  anchor_.header_size_stored = header_stored.size();
  anchor_.header_size_uncompressed = header_uncompressed;
  anchor_.header_codec_id = codec_id();
  anchor_.footer_size_stored = footer_stored.size();
  anchor_.footer_size_uncompressed = footer_uncompressed;
  anchor_.footer_codec_id = codec_id();
  // Metadata objects always use SX; the anchor is rewritten last so an
  // overwritten dataset swaps over cleanly.
  container_->update(MetadataKeys::header(), std::move(header_stored));
  container_->update(MetadataKeys::footer(), std::move(footer_stored));
  container_->update(MetadataKeys::anchor(), anchor_.serialize());
}

// ── DaosSource ───────────────────────────────────────────────────────────────

DaosSource::DaosSource(std::shared_ptr<SimContainer> container)
    : container_(std::move(container)) {
  if (!container_->contains(MetadataKeys::anchor())) {
    throw NotFoundError("container holds no dataset (anchor object absent)");
  }
  ByteBuffer anchor_bytes = container_->fetch(MetadataKeys::anchor());
  anchor_ = DaosAnchor::deserialize(anchor_bytes);

  ByteBuffer header_stored = container_->fetch(MetadataKeys::header());
  if (header_stored.size() != anchor_.header_size_stored) {
    throw CorruptionError("header object size does not match the anchor");
  }
  ByteBuffer header_bytes = decompress(header_stored, anchor_.header_codec_id,
                                       anchor_.header_size_uncompressed);
  ByteBuffer footer_stored = container_->fetch(MetadataKeys::footer());
  if (footer_stored.size() != anchor_.footer_size_stored) {
    throw CorruptionError("footer object size does not match the anchor");
  }
  ByteBuffer footer_bytes = decompress(footer_stored, anchor_.footer_codec_id,
                                       anchor_.footer_size_uncompressed);
  header_ = deserialize_header(header_bytes);
  footer_ = deserialize_footer(footer_bytes);
  if (schema_digest(header_bytes) != footer_.schema_digest) {
    throw CorruptionError("schema digest mismatch between header and footer");
  }
  io_.meta_ops = 3;
  io_.meta_bytes = anchor_bytes.size() + header_stored.size() + footer_stored.size();
}

CostReport DaosSource::last_batch_cost() const {
  std::lock_guard lock(cost_mutex_);
  return last_batch_cost_;
}

ByteBuffer DaosSource::populate_page(const PageLocator& locator) {
  const auto* region = std::get_if<ObjectRegion>(&locator.where);
  if (region == nullptr) {
    throw UsageError("object source given a file locator");
  }
  if (region->size == 0 || locator.uncompressed_size == 0) {
    throw CorruptionError("locator with zero size");
  }
  ByteBuffer stored;
  try {
    stored = container_->fetch(region->key);
  } catch (const NotFoundError& e) {
    throw NotFoundError(std::string("populate_page: ") + e.what());
  }
  if (stored.size() != region->size) {
    throw CorruptionError("stored page size does not match its locator (" +
                          region->key.str() + ")");
  }
  io_.page_ops += 1;
  io_.page_bytes += stored.size();
  return decompress(stored, locator.codec_id, locator.uncompressed_size);
}

std::map<std::uint32_t, std::vector<Page>>
DaosSource::load_cluster(std::uint32_t cluster_id, const std::set<std::uint32_t>& columns) {
  if (cluster_id >= footer_.clusters.size()) {
    throw UsageError("cluster id " + std::to_string(cluster_id) + " out of range");
  }
  const ClusterDescriptor& cluster = footer_.clusters[cluster_id];

  std::vector<IoDescriptor> batch;
  std::vector<std::pair<std::uint32_t, const PageRef*>> refs;
  for (std::uint32_t column_id : columns) {
    auto it = cluster.page_lists.find(column_id);
    if (it == cluster.page_lists.end()) continue;
    for (const PageRef& ref : it->second) {
      const auto* region = std::get_if<ObjectRegion>(&ref.locator.where);
      if (region == nullptr) throw CorruptionError("file locator in an object dataset");
      batch.push_back(IoDescriptor{region->key, IoDescriptor::Direction::kFetch, {}, 0});
      refs.emplace_back(column_id, &ref);
    }
  }

  std::map<std::uint32_t, std::vector<Page>> result;
  if (batch.empty()) {
    CostReport zero;
    zero.per_target_bytes.assign(container_->pool_config().n_targets, 0);
    zero.per_target_ops.assign(container_->pool_config().n_targets, 0);
    std::lock_guard lock(cost_mutex_);
    last_batch_cost_ = std::move(zero);
    return result;
  }

  CostReport batch_cost;
  std::vector<ByteBuffer> payloads = container_->read_v(batch, &batch_cost);
  {
    std::lock_guard lock(cost_mutex_);
    last_batch_cost_ = batch_cost;
  }
  for (std::size_t i = 0; i < payloads.size(); ++i) {
    const auto& [column_id, ref] = refs[i];
    if (payloads[i].size() != ref->locator.stored_size()) {
      throw CorruptionError("stored page size does not match its locator");
    }
    io_.page_ops += 1;
    io_.page_bytes += payloads[i].size();
    Page page;
    page.column_id = column_id;
    page.first_element_index = ref->first_element_index;
    page.n_elements = ref->n_elements;
    page.payload = decompress(payloads[i], ref->locator.codec_id,
                              ref->locator.uncompressed_size);
    result[column_id].push_back(std::move(page));
  }
  return result;
}

} // namespace cntuple
