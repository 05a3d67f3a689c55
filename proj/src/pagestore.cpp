#include "cntuple/pagestore.hpp"

#include <string>
#include <utility>

namespace cntuple {

namespace {

// Locator records are fixed width so the footer can be scanned without
// per-backend branching: tag byte, four u64 address words, stored size,
// uncompressed size, codec id, padding.
enum : std::uint8_t { kLocatorFile = 0, kLocatorObject = 1 };

void serialize_locator(ByteWriter& w, const PageLocator& loc) {
  if (const auto* f = std::get_if<FileRegion>(&loc.where)) {
    w.u8(kLocatorFile);
    for (int i = 0; i < 7; ++i) w.u8(0);
    w.u64(f->offset);
    w.u64(0);
    w.u64(0);
    w.u64(0);
    w.u64(f->size);
  } else {
    const auto& o = std::get<ObjectRegion>(loc.where);
    w.u8(kLocatorObject);
    for (int i = 0; i < 7; ++i) w.u8(0);
    w.u64(o.key.oid.hi);
    w.u64(o.key.oid.lo);
    w.u64(o.key.dkey);
    w.u64(o.key.akey);
    w.u64(o.size);
  }
  w.u64(loc.uncompressed_size);
  w.u16(loc.codec_id);
  for (int i = 0; i < 6; ++i) w.u8(0);
}

PageLocator deserialize_locator(ByteReader& r) {
  PageLocator loc;
  std::uint8_t tag = r.u8();
  r.raw(7);
  std::uint64_t a = r.u64(), b = r.u64(), c = r.u64(), d = r.u64(), size = r.u64();
  if (tag == kLocatorFile) {
    loc.where = FileRegion{a, size};
  } else if (tag == kLocatorObject) {
    loc.where = ObjectRegion{ObjectKey{Oid{a, b}, c, d}, size};
  } else {
    throw CorruptionError("unknown locator tag " + std::to_string(tag));
  }
  loc.uncompressed_size = r.u64();
  loc.codec_id = r.u16();
  r.raw(6);
  if (size == 0 || loc.uncompressed_size == 0) {
    throw CorruptionError("locator with zero size");
  }
  return loc;
}

} // namespace

ByteBuffer serialize_header(const DatasetHeader& header) {
  ByteBuffer out;
  ByteWriter w(out);
  w.u32(header.format_version);
  w.str(header.name);
  header.schema.serialize(w);
  // Column table, redundant with the schema but validated on attach.
  const auto& columns = header.schema.columns();
  w.u32(static_cast<std::uint32_t>(columns.size()));
  for (const ColumnDescriptor& c : columns) {
    w.u32(c.column_id);
    w.u8(static_cast<std::uint8_t>(c.role));
    w.u8(static_cast<std::uint8_t>(c.element_type));
    w.str(c.source_field);
  }
  return out;
}

DatasetHeader deserialize_header(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  DatasetHeader header;
  header.format_version = r.u32();
  if (header.format_version != kFormatVersion) {
    throw CorruptionError("unknown format version " +
                          std::to_string(header.format_version));
  }
  header.name = r.str();
  header.schema = Schema::deserialize(r);
  std::uint32_t n = r.u32();
  std::vector<ColumnDescriptor> table(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    table[i].column_id = r.u32();
    table[i].role = static_cast<ColumnRole>(r.u8());
    auto type = r.u8();
    if (type > 5) throw CorruptionError("unknown column element type tag");
    table[i].element_type = static_cast<PhysicalType>(type);
    table[i].source_field = r.str();
  }
  if (table != header.schema.columns()) {
    throw CorruptionError("header column table does not match its schema");
  }
  return header;
}

ByteBuffer serialize_footer(const DatasetFooter& footer) {
  ByteBuffer out;
  ByteWriter w(out);
  w.u64(footer.n_entries);
  w.u64(footer.schema_digest);
  w.u32(static_cast<std::uint32_t>(footer.clusters.size()));
  for (const ClusterDescriptor& cluster : footer.clusters) {
    w.u32(cluster.cluster_id);
    w.u64(cluster.first_entry);
    w.u64(cluster.n_entries);
    w.u32(static_cast<std::uint32_t>(cluster.page_lists.size()));
    for (const auto& [column_id, pages] : cluster.page_lists) {
      w.u32(column_id);
      w.u32(static_cast<std::uint32_t>(pages.size()));
      for (const PageRef& ref : pages) {
        serialize_locator(w, ref.locator);
        w.u64(ref.first_element_index);
        w.u64(ref.n_elements);
      }
    }
  }
  return out;
}

DatasetFooter deserialize_footer(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  DatasetFooter footer;
  footer.n_entries = r.u64();
  footer.schema_digest = r.u64();
  std::uint32_t n_clusters = r.u32();
  footer.clusters.resize(n_clusters);
  std::uint64_t expected_first_entry = 0;
  for (std::uint32_t i = 0; i < n_clusters; ++i) {
    ClusterDescriptor& cluster = footer.clusters[i];
    cluster.cluster_id = r.u32();
    cluster.first_entry = r.u64();
    cluster.n_entries = r.u64();
    if (cluster.cluster_id != i || cluster.first_entry != expected_first_entry) {
      throw CorruptionError("cluster sequence broken at cluster " + std::to_string(i));
    }
    expected_first_entry += cluster.n_entries;
    std::uint32_t n_columns = r.u32();
    for (std::uint32_t c = 0; c < n_columns; ++c) {
      std::uint32_t column_id = r.u32();
      std::uint32_t n_pages = r.u32();
      auto& pages = cluster.page_lists[column_id];
      pages.resize(n_pages);
      for (std::uint32_t p = 0; p < n_pages; ++p) {
        pages[p].locator = deserialize_locator(r);
        pages[p].first_element_index = r.u64();
        pages[p].n_elements = r.u64();
        if (p > 0 && pages[p].first_element_index !=
                         pages[p - 1].first_element_index + pages[p - 1].n_elements) {
          throw CorruptionError("page ranges not contiguous in cluster " +
                                std::to_string(i) + " column " + std::to_string(column_id));
        }
      }
    }
  }
  if (expected_first_entry != footer.n_entries) {
    throw CorruptionError("clusters do not partition the entry range");
  }
  return footer;
}

// ── StagedSink ───────────────────────────────────────────────────────────────

StagedSink::StagedSink(std::uint16_t codec_id) : codec_id_(codec_id) {
  if (!codec_registered(codec_id)) {
    throw UsageError("unregistered codec id " + std::to_string(codec_id));
  }
}

void StagedSink::require_open(const char* op) const {
  if (closed_) {
    throw UsageError(std::string(op) + " on a closed sink");
  }
}

PageLocator StagedSink::commit_page(std::uint32_t column_id, const Page& page) {
  require_open("commit_page");
  if (page.n_elements == 0) {
    throw UsageError("committed pages must hold at least one element");
  }
  auto& column_pages = pending_pages_[column_id];
  if (!column_pages.empty()) {
    const PageRef& prev = column_pages.back();
    if (page.first_element_index != prev.first_element_index + prev.n_elements) {
      throw UsageError("page element range not contiguous with previous page of column " +
                       std::to_string(column_id));
    }
  }

  PageAddress address;
  address.cluster_id = next_cluster_id_;
  address.page_seq_in_cluster = pages_in_cluster_;
  address.global_page_seq = global_page_seq_;
  address.column_id = column_id;
  address.page_seq_in_column = static_cast<std::uint32_t>(column_pages.size());

  PageLocator locator = write_page(address, compress(page.payload, codec_id_));
  locator.uncompressed_size = page.payload.size();
  locator.codec_id = codec_id_;

  column_pages.push_back(PageRef{locator, page.first_element_index, page.n_elements});
  ++pages_in_cluster_;
  ++global_page_seq_;
  return locator;
}

ClusterDescriptor StagedSink::commit_cluster(std::uint64_t n_entries) {
  require_open("commit_cluster");
  if (pending_pages_.empty()) {
    throw UsageError("commit_cluster without any committed pages");
  }
  on_commit_cluster();
  ClusterDescriptor descriptor;
  descriptor.cluster_id = next_cluster_id_;
  descriptor.first_entry = next_first_entry_;
  descriptor.n_entries = n_entries;
  descriptor.page_lists = std::move(pending_pages_);
  pending_pages_.clear();
  pages_in_cluster_ = 0;
  ++next_cluster_id_;
  next_first_entry_ += n_entries;
  return descriptor;
}

void StagedSink::commit_dataset(const DatasetHeader& header, const DatasetFooter& footer) {
  require_open("commit_dataset");
  if (!pending_pages_.empty()) {
    throw UsageError("commit_dataset with pages pending in an open cluster");
  }
  ByteBuffer header_bytes = serialize_header(header);
  ByteBuffer footer_bytes = serialize_footer(footer);
  std::uint64_t header_size = header_bytes.size();
  std::uint64_t footer_size = footer_bytes.size();
  write_metadata(compress(header_bytes, codec_id_), header_size,
                 compress(footer_bytes, codec_id_), footer_size);
  closed_ = true;
}

} // namespace cntuple
