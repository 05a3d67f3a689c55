#pragma once

#include "cntuple/encoding.hpp"
#include "cntuple/pagestore.hpp"
#include "cntuple/value.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cntuple {

// Event-iteration write path: shreds appended entries into per-column element
// buffers, cutting pages and clusters at the configured sizes. Each column
// pages independently once it holds elements_per_page of its own elements; a
// cluster closes every elements_per_cluster entries.
class DatasetWriter {
public:
  struct Options {
    std::uint64_t elements_per_page = 10000;
    std::uint64_t elements_per_cluster = 320000;
  };

  DatasetWriter(std::string name, Schema schema, PageSink& sink, Options options);

  void append(const Value& entry);

  // Flushes partial pages and the open cluster, then commits the dataset.
  void close();

  std::uint64_t entries() const { return total_entries_; }
  const DatasetFooter& footer() const; // valid after close()

private:
  struct ColumnState {
    PhysicalType type;
    ElementData buffer;
    std::uint64_t flushed = 0;    // elements already committed to pages
    std::uint64_t cumulative = 0; // index columns: running value count
  };

  void append_field(const FieldBinding& binding, const Value& value);
  void emit_page(std::uint32_t column_id, std::uint64_t count);
  void flush_full_pages();
  void flush_cluster();

  DatasetHeader header_;
  PageSink& sink_;
  Options options_;
  std::vector<FieldBinding> bindings_;
  std::vector<ColumnState> columns_;
  std::vector<ClusterDescriptor> clusters_;
  std::uint64_t entries_in_cluster_ = 0;
  std::uint64_t total_entries_ = 0;
  bool closed_ = false;
  DatasetFooter footer_;
};

} // namespace cntuple
