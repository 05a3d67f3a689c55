#include "cntuple/value.hpp"

namespace cntuple {

namespace {

// Mirrors the Flattener traversal so binding column ids line up with
// columns_for_schema.
struct Binder {
  std::uint32_t next_column = 0;

  FieldBinding bind(const FieldDescriptor& field) {
    FieldBinding b;
    b.field = &field;
    b.kind = field.kind;
    b.scalar = field.scalar;
    switch (field.kind) {
      case FieldDescriptor::Kind::kScalar:
        b.column = next_column++;
        return b;
      case FieldDescriptor::Kind::kRecord:
        for (const FieldDescriptor& m : field.children) b.children.push_back(bind(m));
        return b;
      case FieldDescriptor::Kind::kVector: {
        b.column = next_column++; // index column
        b.children.push_back(bind(field.children.front()));
        return b;
      }
    }
    throw SchemaError("unsupported field kind");
  }
};

void check_value(const FieldBinding& binding, const Value& value) {
  switch (binding.kind) {
    case FieldDescriptor::Kind::kScalar:
      switch (binding.scalar) {
        case ScalarType::kInt32: value.as<std::int32_t>(); return;
        case ScalarType::kInt64: value.as<std::int64_t>(); return;
        case ScalarType::kFloat32: value.as<float>(); return;
        case ScalarType::kFloat64: value.as<double>(); return;
        case ScalarType::kBool: value.as<bool>(); return;
      }
      throw SchemaError("unsupported scalar type");
    case FieldDescriptor::Kind::kRecord: {
      const auto& members = value.members();
      if (members.size() != binding.children.size()) {
        throw SchemaError("record member count does not match the schema");
      }
      for (std::size_t i = 0; i < members.size(); ++i) {
        check_value(binding.children[i], members[i]);
      }
      return;
    }
    case FieldDescriptor::Kind::kVector:
      for (const Value& item : value.items()) {
        check_value(binding.children.front(), item);
      }
      return;
  }
  throw SchemaError("unsupported field kind");
}

} // namespace

std::vector<FieldBinding> build_bindings(const Schema& schema) {
  Binder binder;
  std::vector<FieldBinding> bindings;
  bindings.reserve(schema.fields().size());
  for (const FieldDescriptor& f : schema.fields()) {
    bindings.push_back(binder.bind(f));
  }
  if (binder.next_column != schema.columns().size()) {
    throw SchemaError("binding traversal out of sync with the column table");
  }
  return bindings;
}

void check_entry_shape(const std::vector<FieldBinding>& bindings, const Value& entry) {
  const auto& members = entry.members();
  if (members.size() != bindings.size()) {
    throw SchemaError("entry field count does not match the schema");
  }
  for (std::size_t i = 0; i < members.size(); ++i) {
    check_value(bindings[i], members[i]);
  }
}

} // namespace cntuple
