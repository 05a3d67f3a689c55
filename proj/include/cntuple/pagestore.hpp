#pragma once

#include "cntuple/bytes.hpp"
#include "cntuple/codec.hpp"
#include "cntuple/object_key.hpp"
#include "cntuple/schema.hpp"

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace cntuple {

inline constexpr std::uint32_t kFormatVersion = 1;

// Encoded (and possibly compressed upstream) element range of one column.
struct Page {
  std::uint32_t column_id = 0;
  std::uint64_t first_element_index = 0;
  std::uint64_t n_elements = 0;
  ByteBuffer payload;
};

// Backend-agnostic page address.
struct FileRegion {
  std::uint64_t offset = 0;
  std::uint64_t size = 0;

  friend bool operator==(const FileRegion&, const FileRegion&) = default;
};

struct ObjectRegion {
  ObjectKey key;
  std::uint64_t size = 0;

  friend bool operator==(const ObjectRegion&, const ObjectRegion&) = default;
};

struct PageLocator {
  std::variant<FileRegion, ObjectRegion> where;
  std::uint64_t uncompressed_size = 0;
  std::uint16_t codec_id = kCodecNone;

  std::uint64_t stored_size() const {
    return std::holds_alternative<FileRegion>(where)
               ? std::get<FileRegion>(where).size
               : std::get<ObjectRegion>(where).size;
  }

  friend bool operator==(const PageLocator&, const PageLocator&) = default;
};

// Footer entry: locator plus the element range it covers.
struct PageRef {
  PageLocator locator;
  std::uint64_t first_element_index = 0;
  std::uint64_t n_elements = 0;

  friend bool operator==(const PageRef&, const PageRef&) = default;
};

struct ClusterDescriptor {
  std::uint32_t cluster_id = 0;
  std::uint64_t first_entry = 0;
  std::uint64_t n_entries = 0;
  // Per column id, pages in element order. Columns without elements in this
  // cluster have no entry.
  std::map<std::uint32_t, std::vector<PageRef>> page_lists;
};

struct DatasetHeader {
  std::uint32_t format_version = kFormatVersion;
  std::string name;
  Schema schema;
};

struct DatasetFooter {
  std::vector<ClusterDescriptor> clusters;
  std::uint64_t n_entries = 0;
  std::uint64_t schema_digest = 0;
};

ByteBuffer serialize_header(const DatasetHeader& header);
DatasetHeader deserialize_header(std::span<const std::byte> bytes);
ByteBuffer serialize_footer(const DatasetFooter& footer);
DatasetFooter deserialize_footer(std::span<const std::byte> bytes);

// Digest stored in the footer and checked on attach.
inline std::uint64_t schema_digest(std::span<const std::byte> header_bytes) {
  return fnv1a64(header_bytes);
}

// Fetch accounting, split so benchmark assertions can exclude metadata.
struct IoAccounting {
  std::uint64_t page_ops = 0;
  std::uint64_t page_bytes = 0; // stored page bytes fetched
  std::uint64_t meta_ops = 0;
  std::uint64_t meta_bytes = 0;
};

// Internal counter block for sources, which must stay readable while other
// threads populate pages.
struct AtomicIoAccounting {
  std::atomic<std::uint64_t> page_ops{0};
  std::atomic<std::uint64_t> page_bytes{0};
  std::atomic<std::uint64_t> meta_ops{0};
  std::atomic<std::uint64_t> meta_bytes{0};

  IoAccounting snapshot() const {
    return IoAccounting{page_ops.load(), page_bytes.load(), meta_ops.load(),
                        meta_bytes.load()};
  }
};

// ── Storage contracts ────────────────────────────────────────────────────────

class PageSink {
public:
  virtual ~PageSink() = default;

  // Stages the page payload (after the codec) in the backend; the returned
  // locator resolves back to it. Pages belong to the current open cluster.
  virtual PageLocator commit_page(std::uint32_t column_id, const Page& page) = 0;

  // Closes the current cluster over every page committed since the previous
  // boundary. At least one page is required.
  virtual ClusterDescriptor commit_cluster(std::uint64_t n_entries) = 0;

  // Persists header, footer and finally the anchor; afterwards the sink is
  // closed and the dataset is attachable by a fresh source.
  virtual void commit_dataset(const DatasetHeader& header, const DatasetFooter& footer) = 0;

  virtual std::uint16_t codec_id() const = 0;
};

class PageSource {
public:
  virtual ~PageSource() = default;

  virtual const DatasetHeader& header() const = 0;
  virtual const DatasetFooter& footer() const = 0;

  // Fetches and decompresses one page payload.
  virtual ByteBuffer populate_page(const PageLocator& locator) = 0;

  // Reads all pages of the selected columns in one cluster. Byte-identical to
  // a populate_page loop; backends may batch or coalesce the fetches.
  virtual std::map<std::uint32_t, std::vector<Page>>
  load_cluster(std::uint32_t cluster_id, const std::set<std::uint32_t>& columns) = 0;

  virtual IoAccounting io_accounting() const = 0;
};

// Shared sink bookkeeping: cluster/page counters, codec stage, and the
// open → committed state machine. Backends implement the two write hooks.
class StagedSink : public PageSink {
public:
  PageLocator commit_page(std::uint32_t column_id, const Page& page) final;
  ClusterDescriptor commit_cluster(std::uint64_t n_entries) final;
  void commit_dataset(const DatasetHeader& header, const DatasetFooter& footer) final;

  std::uint16_t codec_id() const final { return codec_id_; }

protected:
  explicit StagedSink(std::uint16_t codec_id);

  // Position of a page within the dataset, for backends that derive
  // addresses from it.
  struct PageAddress {
    std::uint32_t cluster_id = 0;
    std::uint32_t page_seq_in_cluster = 0;
    std::uint64_t global_page_seq = 0;
    std::uint32_t column_id = 0;
    std::uint32_t page_seq_in_column = 0; // ordinal of this column's pages in the cluster
  };

  virtual PageLocator write_page(const PageAddress& address, ByteBuffer stored) = 0;
  virtual void write_metadata(ByteBuffer header_stored, std::uint64_t header_uncompressed,
                              ByteBuffer footer_stored, std::uint64_t footer_uncompressed) = 0;
  // Called when a cluster boundary commits, before the descriptor is built.
  virtual void on_commit_cluster() {}

private:
  void require_open(const char* op) const;

  std::uint16_t codec_id_;
  bool closed_ = false;
  std::uint32_t next_cluster_id_ = 0;
  std::uint64_t next_first_entry_ = 0;
  std::uint64_t global_page_seq_ = 0;
  std::uint32_t pages_in_cluster_ = 0;
  std::map<std::uint32_t, std::vector<PageRef>> pending_pages_;
};

} // namespace cntuple
