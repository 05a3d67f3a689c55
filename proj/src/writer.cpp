#include "cntuple/writer.hpp"

#include <utility>

namespace cntuple {

namespace {

ElementData empty_buffer_for(PhysicalType type) {
  switch (type) {
    case PhysicalType::kInt32: return std::vector<std::int32_t>{};
    case PhysicalType::kInt64: return std::vector<std::int64_t>{};
    case PhysicalType::kFloat32: return std::vector<float>{};
    case PhysicalType::kFloat64: return std::vector<double>{};
    case PhysicalType::kPackedBool: return std::vector<std::uint8_t>{};
    case PhysicalType::kIndex64: return std::vector<std::uint64_t>{};
  }
  throw SchemaError("unknown physical type");
}

// Encodes the first `count` buffered elements and drops them from the buffer.
ByteBuffer encode_and_drop(ElementData& buffer, std::uint64_t count) {
  ByteBuffer payload;
  std::visit(
      [&](auto& vec) {
        using T = typename std::remove_reference_t<decltype(vec)>::value_type;
        std::span<const T> head(vec.data(), count);
        if constexpr (std::is_same_v<T, std::uint8_t>) {
          encode_packed_bools_into(payload, head);
        } else {
          encode_fixed_into<T>(payload, head);
        }
        vec.erase(vec.begin(), vec.begin() + static_cast<std::ptrdiff_t>(count));
      },
      buffer);
  return payload;
}

} // namespace

DatasetWriter::DatasetWriter(std::string name, Schema schema, PageSink& sink,
                             Options options)
    : sink_(sink), options_(options) {
  if (options_.elements_per_page < 1) {
    throw UsageError("elements_per_page must be at least 1");
  }
  if (options_.elements_per_cluster < options_.elements_per_page) {
    throw UsageError("elements_per_cluster must be at least elements_per_page");
  }
  header_.name = std::move(name);
  header_.schema = std::move(schema);
  bindings_ = build_bindings(header_.schema);
  columns_.reserve(header_.schema.columns().size());
  for (const ColumnDescriptor& c : header_.schema.columns()) {
    ColumnState state;
    state.type = c.element_type;
    state.buffer = empty_buffer_for(c.element_type);
    columns_.push_back(std::move(state));
  }
}

void DatasetWriter::append(const Value& entry) {
  if (closed_) throw UsageError("append on a closed writer");
  check_entry_shape(bindings_, entry); // validate before mutating any buffer
  const auto& members = entry.members();
  for (std::size_t i = 0; i < bindings_.size(); ++i) {
    append_field(bindings_[i], members[i]);
  }
  ++entries_in_cluster_;
  ++total_entries_;
  flush_full_pages();
  if (entries_in_cluster_ == options_.elements_per_cluster) {
    flush_cluster();
  }
}

void DatasetWriter::append_field(const FieldBinding& binding, const Value& value) {
  switch (binding.kind) {
    case FieldDescriptor::Kind::kScalar: {
      ColumnState& state = columns_[binding.column];
      switch (binding.scalar) {
        case ScalarType::kInt32:
          std::get<std::vector<std::int32_t>>(state.buffer).push_back(value.as<std::int32_t>());
          return;
        case ScalarType::kInt64:
          std::get<std::vector<std::int64_t>>(state.buffer).push_back(value.as<std::int64_t>());
          return;
        case ScalarType::kFloat32:
          std::get<std::vector<float>>(state.buffer).push_back(value.as<float>());
          return;
        case ScalarType::kFloat64:
          std::get<std::vector<double>>(state.buffer).push_back(value.as<double>());
          return;
        case ScalarType::kBool:
          std::get<std::vector<std::uint8_t>>(state.buffer)
              .push_back(value.as<bool>() ? 1 : 0);
          return;
      }
      throw SchemaError("unsupported scalar type");
    }
    case FieldDescriptor::Kind::kRecord: {
      const auto& members = value.members();
      for (std::size_t i = 0; i < binding.children.size(); ++i) {
        append_field(binding.children[i], members[i]);
      }
      return;
    }
    case FieldDescriptor::Kind::kVector: {
      const auto& items = value.items();
      ColumnState& state = columns_[binding.column];
      state.cumulative += items.size();
      std::get<std::vector<std::uint64_t>>(state.buffer).push_back(state.cumulative);
      for (const Value& item : items) {
        append_field(binding.children.front(), item);
      }
      return;
    }
  }
  throw SchemaError("unsupported field kind");
}

void DatasetWriter::emit_page(std::uint32_t column_id, std::uint64_t count) {
  ColumnState& state = columns_[column_id];
  Page page;
  page.column_id = column_id;
  page.first_element_index = state.flushed;
  page.n_elements = count;
  page.payload = encode_and_drop(state.buffer, count);
  sink_.commit_page(column_id, page);
  state.flushed += count;
}

void DatasetWriter::flush_full_pages() {
  for (std::uint32_t id = 0; id < columns_.size(); ++id) {
    while (element_count(columns_[id].buffer) >= options_.elements_per_page) {
      emit_page(id, options_.elements_per_page);
    }
  }
}

void DatasetWriter::flush_cluster() {
  for (std::uint32_t id = 0; id < columns_.size(); ++id) {
    std::uint64_t pending = element_count(columns_[id].buffer);
    if (pending > 0) emit_page(id, pending);
  }
  clusters_.push_back(sink_.commit_cluster(entries_in_cluster_));
  entries_in_cluster_ = 0;
}

void DatasetWriter::close() {
  if (closed_) throw UsageError("close on a closed writer");
  if (entries_in_cluster_ > 0) {
    flush_cluster();
  }
  footer_.clusters = std::move(clusters_);
  footer_.n_entries = total_entries_;
  footer_.schema_digest = schema_digest(serialize_header(header_));
  sink_.commit_dataset(header_, footer_);
  closed_ = true;
}

const DatasetFooter& DatasetWriter::footer() const {
  if (!closed_) throw UsageError("footer requested before close");
  return footer_;
}

} // namespace cntuple
