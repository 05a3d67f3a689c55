#pragma once

#include "cntuple/object_store.hpp"
#include "cntuple/pagestore.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace cntuple {

// daos://<pool-uuid>:<rank>(_<rank>)*/<container-uuid>
struct DaosUri {
  Uuid pool_uuid;
  std::vector<std::uint32_t> svc_ranks; // parsed, unused by the simulator
  Uuid container_uuid;

  friend bool operator==(const DaosUri&, const DaosUri&) = default;
};

DaosUri parse_daos_uri(const std::string& text); // throws UriError
std::string format_daos_uri(const DaosUri& uri);
bool is_daos_uri(const std::string& location);

// Rule assigning object keys to pages. Fixed per dataset and recorded in the
// anchor object so attach needs no out-of-band knowledge.
enum class MappingStrategy : std::uint8_t {
  kOidPerPage = 0,   // sequential OID per committed page, dkey/akey constant
  kOidPerCluster = 1,// OID = cluster id, dkey = page sequence in cluster
  kAkeyPerPage = 2,  // OID = cluster id, dkey = column id, akey = page ordinal
};

MappingStrategy mapping_from_name(const std::string& name);
const char* mapping_name(MappingStrategy strategy);

// Page OIDs live in a namespace disjoint from metadata OIDs: pages use
// high word 1, metadata high word 0.
inline constexpr std::uint64_t kPageOidHi = 1;

struct MetadataKeys {
  static ObjectKey anchor() { return {{0, 0}, 0, 0}; }
  static ObjectKey header() { return {{0, 1}, 0, 0}; }
  static ObjectKey footer() { return {{0, 2}, 0, 0}; }
};

struct PagePlacement {
  std::uint32_t cluster_id = 0;
  std::uint32_t page_seq_in_cluster = 0;
  std::uint64_t global_page_seq = 0;
  std::uint32_t column_id = 0;
  std::uint32_t page_seq_in_column = 0; // within the cluster
};

ObjectKey keys_for_page(MappingStrategy strategy, const PagePlacement& page);

// Anchor object payload: format version, mapping strategy, object class, and
// the header/footer section sizes and codecs.
struct DaosAnchor {
  std::uint32_t format_version = kFormatVersion;
  MappingStrategy strategy = MappingStrategy::kOidPerPage;
  ObjectClass objclass = ObjectClass::sx();
  std::uint64_t header_size_stored = 0;
  std::uint64_t header_size_uncompressed = 0;
  std::uint64_t footer_size_stored = 0;
  std::uint64_t footer_size_uncompressed = 0;
  std::uint16_t header_codec_id = kCodecNone;
  std::uint16_t footer_codec_id = kCodecNone;

  ByteBuffer serialize() const;
  static DaosAnchor deserialize(std::span<const std::byte> bytes);
};

struct DaosSinkOptions {
  MappingStrategy strategy = MappingStrategy::kOidPerPage;
  ObjectClass objclass = ObjectClass::sx();
  std::uint16_t codec_id = kCodecNone;
  // Off by default: pages are written synchronously one update per commit.
  // When on, page updates are staged and flushed as one write_v per cluster.
  bool batched_cluster_writes = false;
};

class DaosSink final : public StagedSink {
public:
  DaosSink(std::shared_ptr<SimContainer> container, DaosSinkOptions options);

  const DaosAnchor& anchor() const { return anchor_; }

protected:
  PageLocator write_page(const PageAddress& address, ByteBuffer stored) override;
  void write_metadata(ByteBuffer header_stored, std::uint64_t header_uncompressed,
                      ByteBuffer footer_stored, std::uint64_t footer_uncompressed) override;
  void on_commit_cluster() override;

private:
  std::shared_ptr<SimContainer> container_;
  DaosSinkOptions options_;
  DaosAnchor anchor_;
  std::vector<IoDescriptor> staged_; // batched_cluster_writes only
};

class DaosSource final : public PageSource {
public:
  // Attaches: fetches and validates the anchor, header and footer objects.
  explicit DaosSource(std::shared_ptr<SimContainer> container);

  const DatasetHeader& header() const override { return header_; }
  const DatasetFooter& footer() const override { return footer_; }
  const DaosAnchor& anchor() const { return anchor_; }
  MappingStrategy strategy() const { return anchor_.strategy; }

  ByteBuffer populate_page(const PageLocator& locator) override;

  // One read_v batch over all selected page keys.
  std::map<std::uint32_t, std::vector<Page>>
  load_cluster(std::uint32_t cluster_id, const std::set<std::uint32_t>& columns) override;

  IoAccounting io_accounting() const override { return io_.snapshot(); }
  // Cost of the most recent load_cluster batch.
  CostReport last_batch_cost() const;
  double simulated_seconds() const { return container_->simulated_seconds(); }

private:
  std::shared_ptr<SimContainer> container_;
  DaosAnchor anchor_;
  DatasetHeader header_;
  DatasetFooter footer_;
  AtomicIoAccounting io_;
  mutable std::mutex cost_mutex_;
  CostReport last_batch_cost_;
};

} // namespace cntuple
