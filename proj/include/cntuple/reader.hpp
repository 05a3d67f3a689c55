#pragma once

#include "cntuple/encoding.hpp"
#include "cntuple/pagestore.hpp"
#include "cntuple/value.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cntuple {

template <typename T>
struct physical_of;
template <>
struct physical_of<std::int32_t> {
  static constexpr PhysicalType value = PhysicalType::kInt32;
};
template <>
struct physical_of<std::int64_t> {
  static constexpr PhysicalType value = PhysicalType::kInt64;
};
template <>
struct physical_of<float> {
  static constexpr PhysicalType value = PhysicalType::kFloat32;
};
template <>
struct physical_of<double> {
  static constexpr PhysicalType value = PhysicalType::kFloat64;
};
template <>
struct physical_of<bool> {
  static constexpr PhysicalType value = PhysicalType::kPackedBool;
};
template <>
struct physical_of<std::uint64_t> {
  static constexpr PhysicalType value = PhysicalType::kIndex64;
};

template <typename T>
class ScalarView;
template <typename T>
class VectorView;

// Event-iteration read path. Pages are pulled cluster by cluster through
// load_cluster over the union of the columns registered by views, so a
// sequential pass loads every touched page exactly once and never fetches
// columns nobody asked for.
class DatasetReader {
public:
  explicit DatasetReader(std::shared_ptr<PageSource> source);

  const DatasetHeader& header() const { return source_->header(); }
  const Schema& schema() const { return source_->header().schema; }
  std::uint64_t n_entries() const { return source_->footer().n_entries; }
  PageSource& source() { return *source_; }

  template <typename T>
  ScalarView<T> view(const std::string& field_name);
  template <typename T>
  VectorView<T> vector_view(const std::string& field_name);

  // Decodes the whole dataset back into entry values (oracle/round-trip path).
  std::vector<Value> read_all();

  // Decoded elements [lo, hi) of one column.
  ElementData read_elements(std::uint32_t column_id, std::uint64_t lo, std::uint64_t hi);

  std::uint64_t column_elements(std::uint32_t column_id) const;
  std::uint32_t cluster_of_entry(std::uint64_t entry_index) const;
  // first_element_index of the column's first page in a cluster, if any.
  std::optional<std::uint64_t> column_cluster_base(std::uint32_t column_id,
                                                   std::uint32_t cluster_id) const;

  // Page table and cache access used by the typed views.
  std::size_t page_ordinal(std::uint32_t column_id, std::uint64_t element_index) const;
  struct PageSlot {
    PageRef ref;
    std::uint32_t cluster_id = 0;
    std::uint32_t index_in_cluster = 0;
  };
  const PageSlot& page_slot(std::uint32_t column_id, std::size_t ordinal) const;
  const Page& page(std::uint32_t column_id, std::size_t ordinal);

  void register_column(std::uint32_t column_id);

private:
  void ensure_cluster(std::uint32_t cluster_id, std::uint32_t column_id);
  std::vector<Value> read_range(const FieldBinding& binding, std::uint64_t lo,
                                std::uint64_t hi);

  std::shared_ptr<PageSource> source_;
  std::vector<FieldBinding> bindings_;
  std::vector<std::vector<PageSlot>> page_table_; // per column, element order
  std::set<std::uint32_t> registered_;
  std::optional<std::uint32_t> loaded_cluster_;
  std::set<std::uint32_t> loaded_columns_;
  std::map<std::uint32_t, std::vector<Page>> cluster_cache_;
};

// Typed per-column element access with a two-page decoded cache, so scans
// (including the index/value pair walked by VectorView) decode each page once.
template <typename T>
class ColumnAccessor {
public:
  using Stored = std::conditional_t<std::is_same_v<T, bool>, std::uint8_t, T>;

  ColumnAccessor() = default;
  ColumnAccessor(DatasetReader* reader, std::uint32_t column_id)
      : reader_(reader), column_(column_id) {}

  T at(std::uint64_t element_index) {
    const std::vector<Stored>& values = slab_for(element_index);
    return static_cast<T>(values[element_index - slots_[mru_].first]);
  }

  void append_range(std::uint64_t lo, std::uint64_t hi, std::vector<T>& out) {
    while (lo < hi) {
      const std::vector<Stored>& values = slab_for(lo);
      std::uint64_t first = slots_[mru_].first;
      std::uint64_t page_end = first + values.size();
      std::uint64_t take_end = std::min(hi, page_end);
      for (std::uint64_t i = lo; i < take_end; ++i) {
        out.push_back(static_cast<T>(values[i - first]));
      }
      lo = take_end;
    }
  }

private:
  const std::vector<Stored>& slab_for(std::uint64_t element_index) {
    for (int s = 0; s < 2; ++s) {
      if (slots_[s].ordinal != kEmpty && element_index >= slots_[s].first &&
          element_index < slots_[s].first + slots_[s].values.size()) {
        mru_ = s;
        return slots_[s].values;
      }
    }
    std::size_t ordinal = reader_->page_ordinal(column_, element_index);
    const Page& page = reader_->page(column_, ordinal);
    int victim = 1 - mru_;
    slots_[victim].ordinal = ordinal;
    slots_[victim].first = page.first_element_index;
    slots_[victim].values = decode_page(page);
    mru_ = victim;
    return slots_[victim].values;
  }

  std::vector<Stored> decode_page(const Page& page) const {
    if constexpr (std::is_same_v<T, bool>) {
      return decode_packed_bools(page.payload, page.n_elements);
    } else {
      return decode_fixed<Stored>(page.payload, page.n_elements);
    }
  }

  static constexpr std::size_t kEmpty = static_cast<std::size_t>(-1);
  struct Slot {
    std::size_t ordinal = kEmpty;
    std::uint64_t first = 0;
    std::vector<Stored> values;
  };

  DatasetReader* reader_ = nullptr;
  std::uint32_t column_ = 0;
  std::array<Slot, 2> slots_;
  int mru_ = 0;
};

// Lazily loading view over one scalar field; entry index == element index.
template <typename T>
class ScalarView {
public:
  ScalarView(DatasetReader* reader, std::uint32_t column_id)
      : reader_(reader), accessor_(reader, column_id) {}

  T at(std::uint64_t entry_index) {
    if (entry_index >= reader_->n_entries()) {
      throw UsageError("entry index " + std::to_string(entry_index) + " out of range");
    }
    return accessor_.at(entry_index);
  }
  T operator()(std::uint64_t entry_index) { return at(entry_index); }

private:
  DatasetReader* reader_;
  ColumnAccessor<T> accessor_;
};

// View over a vector-of-scalar field: per entry, the index column bounds the
// element range sliced out of the value column.
template <typename T>
class VectorView {
public:
  VectorView(DatasetReader* reader, std::uint32_t index_column,
             std::uint32_t value_column)
      : reader_(reader), index_(reader, index_column), values_(reader, value_column),
        value_column_(value_column) {}

  std::vector<T> at(std::uint64_t entry_index) {
    if (entry_index >= reader_->n_entries()) {
      throw UsageError("entry index " + std::to_string(entry_index) + " out of range");
    }
    std::uint64_t hi = index_.at(entry_index);
    std::uint32_t cluster = reader_->cluster_of_entry(entry_index);
    std::uint64_t lo;
    if (entry_index == 0) {
      lo = 0;
    } else if (auto base = first_entry_base(entry_index, cluster)) {
      lo = *base;
    } else {
      lo = index_.at(entry_index - 1);
    }
    std::vector<T> out;
    out.reserve(hi - lo);
    if (lo < hi) values_.append_range(lo, hi, out);
    return out;
  }
  std::vector<T> operator()(std::uint64_t entry_index) { return at(entry_index); }

private:
  // At a cluster's first entry the previous index element lives one cluster
  // back; the value column's own first page in this cluster carries the same
  // offset, so use it and keep reads inside the cluster.
  std::optional<std::uint64_t> first_entry_base(std::uint64_t entry_index,
                                                std::uint32_t cluster) {
    if (entry_index != reader_->source().footer().clusters[cluster].first_entry) {
      return std::nullopt;
    }
    auto base = reader_->column_cluster_base(value_column_, cluster);
    // No value pages in this cluster means every entry in it is empty.
    return base ? base : std::optional<std::uint64_t>(index_.at(entry_index));
  }

  DatasetReader* reader_;
  ColumnAccessor<std::uint64_t> index_;
  ColumnAccessor<T> values_;
  std::uint32_t value_column_;
};

template <typename T>
ScalarView<T> DatasetReader::view(const std::string& field_name) {
  const ColumnDescriptor& column = schema().column_for(field_name, ColumnRole::kValue);
  if (column.element_type != physical_of<T>::value) {
    throw SchemaError("view type does not match column " + field_name + " (" +
                      physical_name(column.element_type) + ")");
  }
  register_column(column.column_id);
  return ScalarView<T>(this, column.column_id);
}

template <typename T>
VectorView<T> DatasetReader::vector_view(const std::string& field_name) {
  const ColumnDescriptor& index = schema().column_for(field_name, ColumnRole::kIndex);
  const ColumnDescriptor& values = schema().column_for(field_name, ColumnRole::kValue);
  if (values.element_type != physical_of<T>::value) {
    throw SchemaError("view type does not match column " + field_name + " (" +
                      physical_name(values.element_type) + ")");
  }
  register_column(index.column_id);
  register_column(values.column_id);
  return VectorView<T>(this, index.column_id, values.column_id);
}

} // namespace cntuple
