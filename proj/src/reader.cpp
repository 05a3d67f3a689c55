#include "cntuple/reader.hpp"

#include <algorithm>
#include <utility>

namespace cntuple {

DatasetReader::DatasetReader(std::shared_ptr<PageSource> source)
    : source_(std::move(source)) {
  bindings_ = build_bindings(schema());
  page_table_.resize(schema().columns().size());
  for (const ClusterDescriptor& cluster : source_->footer().clusters) {
    for (const auto& [column_id, pages] : cluster.page_lists) {
      if (column_id >= page_table_.size()) {
        throw CorruptionError("footer references column " + std::to_string(column_id) +
                              " beyond the schema");
      }
      auto& slots = page_table_[column_id];
      for (std::uint32_t i = 0; i < pages.size(); ++i) {
        if (!slots.empty()) {
          const PageSlot& prev = slots.back();
          if (pages[i].first_element_index !=
              prev.ref.first_element_index + prev.ref.n_elements) {
            throw CorruptionError("page ranges not contiguous for column " +
                                  std::to_string(column_id));
          }
        } else if (pages[i].first_element_index != 0) {
          throw CorruptionError("first page of column " + std::to_string(column_id) +
                                " does not start at element 0");
        }
        slots.push_back(PageSlot{pages[i], cluster.cluster_id, i});
      }
    }
  }
}

std::uint64_t DatasetReader::column_elements(std::uint32_t column_id) const {
  const auto& slots = page_table_.at(column_id);
  if (slots.empty()) return 0;
  return slots.back().ref.first_element_index + slots.back().ref.n_elements;
}

std::uint32_t DatasetReader::cluster_of_entry(std::uint64_t entry_index) const {
  const auto& clusters = source_->footer().clusters;
  auto it = std::upper_bound(clusters.begin(), clusters.end(), entry_index,
                             [](std::uint64_t e, const ClusterDescriptor& c) {
                               return e < c.first_entry;
                             });
  if (it == clusters.begin()) {
    throw UsageError("entry index before the first cluster");
  }
  return static_cast<std::uint32_t>(std::distance(clusters.begin(), it) - 1);
}

std::optional<std::uint64_t>
DatasetReader::column_cluster_base(std::uint32_t column_id, std::uint32_t cluster_id) const {
  const ClusterDescriptor& cluster = source_->footer().clusters.at(cluster_id);
  auto it = cluster.page_lists.find(column_id);
  if (it == cluster.page_lists.end() || it->second.empty()) return std::nullopt;
  return it->second.front().first_element_index;
}

std::size_t DatasetReader::page_ordinal(std::uint32_t column_id,
                                        std::uint64_t element_index) const {
  const auto& slots = page_table_.at(column_id);
  auto it = std::upper_bound(slots.begin(), slots.end(), element_index,
                             [](std::uint64_t e, const PageSlot& slot) {
                               return e < slot.ref.first_element_index;
                             });
  if (it == slots.begin()) {
    throw UsageError("element index out of range for column " + std::to_string(column_id));
  }
  std::size_t ordinal = static_cast<std::size_t>(std::distance(slots.begin(), it) - 1);
  const PageSlot& slot = slots[ordinal];
  if (element_index >= slot.ref.first_element_index + slot.ref.n_elements) {
    throw UsageError("element index out of range for column " + std::to_string(column_id));
  }
  return ordinal;
}

const DatasetReader::PageSlot& DatasetReader::page_slot(std::uint32_t column_id,
                                                        std::size_t ordinal) const {
  return page_table_.at(column_id).at(ordinal);
}

void DatasetReader::register_column(std::uint32_t column_id) {
  if (column_id >= page_table_.size()) {
    throw UsageError("column id out of range");
  }
  registered_.insert(column_id);
}

void DatasetReader::ensure_cluster(std::uint32_t cluster_id, std::uint32_t column_id) {
  std::set<std::uint32_t> wanted = registered_;
  wanted.insert(column_id);
  if (!loaded_cluster_ || *loaded_cluster_ != cluster_id) {
    cluster_cache_ = source_->load_cluster(cluster_id, wanted);
    loaded_cluster_ = cluster_id;
    loaded_columns_ = std::move(wanted);
    return;
  }
  if (!loaded_columns_.count(column_id)) {
    auto extra = source_->load_cluster(cluster_id, {column_id});
    for (auto& [id, pages] : extra) {
      cluster_cache_[id] = std::move(pages);
    }
    loaded_columns_.insert(column_id);
  }
}

const Page& DatasetReader::page(std::uint32_t column_id, std::size_t ordinal) {
  const PageSlot& slot = page_slot(column_id, ordinal);
  ensure_cluster(slot.cluster_id, column_id);
  auto it = cluster_cache_.find(column_id);
  if (it == cluster_cache_.end() || slot.index_in_cluster >= it->second.size()) {
    throw CorruptionError("loaded cluster is missing a footer-listed page");
  }
  return it->second[slot.index_in_cluster];
}

ElementData DatasetReader::read_elements(std::uint32_t column_id, std::uint64_t lo,
                                         std::uint64_t hi) {
  if (column_id >= page_table_.size()) throw UsageError("column id out of range");
  PhysicalType type = schema().columns()[column_id].element_type;
  if (lo > hi || hi > column_elements(column_id)) {
    throw UsageError("element range out of bounds for column " + std::to_string(column_id));
  }
  ElementData out = decode_elements(type, {}, 0);
  if (lo == hi) return out;
  std::size_t ordinal = page_ordinal(column_id, lo);
  std::uint64_t at = lo;
  while (at < hi) {
    const Page& p = page(column_id, ordinal);
    ElementData decoded = decode_elements(type, p.payload, p.n_elements);
    std::uint64_t take_end = std::min(hi, p.first_element_index + p.n_elements);
    std::visit(
        [&](auto& dst) {
          using V = std::remove_reference_t<decltype(dst)>;
          auto& src = std::get<V>(decoded);
          dst.insert(dst.end(), src.begin() + (at - p.first_element_index),
                     src.begin() + (take_end - p.first_element_index));
        },
        out);
    at = take_end;
    ++ordinal;
  }
  return out;
}

std::vector<Value> DatasetReader::read_range(const FieldBinding& binding,
                                             std::uint64_t lo, std::uint64_t hi) {
  std::vector<Value> out;
  out.reserve(hi - lo);
  switch (binding.kind) {
    case FieldDescriptor::Kind::kScalar: {
      ElementData e = read_elements(binding.column, lo, hi);
      switch (binding.scalar) {
        case ScalarType::kInt32:
          for (auto v : std::get<std::vector<std::int32_t>>(e)) out.push_back(Value::i32(v));
          break;
        case ScalarType::kInt64:
          for (auto v : std::get<std::vector<std::int64_t>>(e)) out.push_back(Value::i64(v));
          break;
        case ScalarType::kFloat32:
          for (auto v : std::get<std::vector<float>>(e)) out.push_back(Value::f32(v));
          break;
        case ScalarType::kFloat64:
          for (auto v : std::get<std::vector<double>>(e)) out.push_back(Value::f64(v));
          break;
        case ScalarType::kBool:
          for (auto v : std::get<std::vector<std::uint8_t>>(e))
            out.push_back(Value::boolean(v != 0));
          break;
      }
      return out;
    }
    case FieldDescriptor::Kind::kRecord: {
      std::vector<std::vector<Value>> per_member;
      per_member.reserve(binding.children.size());
      for (const FieldBinding& child : binding.children) {
        per_member.push_back(read_range(child, lo, hi));
      }
      for (std::uint64_t i = 0; i < hi - lo; ++i) {
        std::vector<Value> members;
        members.reserve(per_member.size());
        for (auto& column : per_member) members.push_back(std::move(column[i]));
        out.push_back(Value::rec(std::move(members)));
      }
      return out;
    }
    case FieldDescriptor::Kind::kVector: {
      auto ends = std::get<std::vector<std::uint64_t>>(
          read_elements(binding.column, lo, hi));
      std::uint64_t child_lo;
      if (lo == 0) {
        child_lo = 0;
      } else {
        child_lo = std::get<std::vector<std::uint64_t>>(
            read_elements(binding.column, lo - 1, lo))[0];
      }
      std::uint64_t child_hi = ends.empty() ? child_lo : ends.back();
      std::vector<Value> children = read_range(binding.children.front(), child_lo, child_hi);
      std::uint64_t start = child_lo;
      for (std::uint64_t end : ends) {
        std::vector<Value> items;
        items.reserve(end - start);
        for (std::uint64_t i = start; i < end; ++i) {
          items.push_back(std::move(children[i - child_lo]));
        }
        out.push_back(Value::vec(std::move(items)));
        start = end;
      }
      return out;
    }
  }
  throw SchemaError("unsupported field kind");
}

std::vector<Value> DatasetReader::read_all() {
  for (std::uint32_t id = 0; id < page_table_.size(); ++id) register_column(id);
  std::uint64_t n = n_entries();
  std::vector<std::vector<Value>> per_field;
  per_field.reserve(bindings_.size());
  for (const FieldBinding& binding : bindings_) {
    per_field.push_back(read_range(binding, 0, n));
  }
  std::vector<Value> entries;
  entries.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::vector<Value> members;
    members.reserve(per_field.size());
    for (auto& field : per_field) members.push_back(std::move(field[i]));
    entries.push_back(Value::rec(std::move(members)));
  }
  return entries;
}

} // namespace cntuple
