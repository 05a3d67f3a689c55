#include "cntuple/schema.hpp"

#include <algorithm>
#include <unordered_set>
#include <utility>

namespace cntuple {

namespace {

bool valid_field_name(const std::string& name) {
  if (name.empty()) return false;
  auto head = [](char c) { return c == '_' || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); };
  auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
  if (!head(name[0])) return false;
  return std::all_of(name.begin() + 1, name.end(), tail);
}

PhysicalType physical_for(ScalarType type) {
  switch (type) {
    case ScalarType::kInt32: return PhysicalType::kInt32;
    case ScalarType::kInt64: return PhysicalType::kInt64;
    case ScalarType::kFloat32: return PhysicalType::kFloat32;
    case ScalarType::kFloat64: return PhysicalType::kFloat64;
    case ScalarType::kBool: return PhysicalType::kPackedBool;
  }
  throw SchemaError("unsupported scalar type");
}

struct Flattener {
  std::vector<ColumnDescriptor> columns;
  std::unordered_set<std::string> seen_paths;

  void check_path(const std::string& path) {
    if (!seen_paths.insert(path).second) {
      throw SchemaError("duplicate qualified field name: " + path);
    }
  }

  void emit(ColumnRole role, PhysicalType type, const std::string& path) {
    columns.push_back(ColumnDescriptor{
        static_cast<std::uint32_t>(columns.size()), role, type, path});
  }

  // `field.name` must already be validated/qualified into `path` by caller.
  void walk(const FieldDescriptor& field, const std::string& path) {
    switch (field.kind) {
      case FieldDescriptor::Kind::kScalar:
        if (!field.children.empty()) {
          throw SchemaError("scalar field has children: " + path);
        }
        emit(ColumnRole::kValue, physical_for(field.scalar), path);
        return;
      case FieldDescriptor::Kind::kRecord:
        if (field.children.empty()) {
          throw SchemaError("record group has no members: " + path);
        }
        walk_members(field.children, path);
        return;
      case FieldDescriptor::Kind::kVector: {
        if (field.children.size() != 1) {
          throw SchemaError("vector field needs exactly one item type: " + path);
        }
        const FieldDescriptor& item = field.children.front();
        if (!item.name.empty()) {
          throw SchemaError("vector item must be anonymous: " + path);
        }
        emit(ColumnRole::kIndex, PhysicalType::kIndex64, path);
        switch (item.kind) {
          case FieldDescriptor::Kind::kScalar:
            // Value column shares the vector's own qualified name.
            emit(ColumnRole::kValue, physical_for(item.scalar), path);
            return;
          case FieldDescriptor::Kind::kRecord:
            if (item.children.empty()) {
              throw SchemaError("record group has no members: " + path);
            }
            walk_members(item.children, path);
            return;
          case FieldDescriptor::Kind::kVector:
            // Directly nested vectors get a synthetic "_0" path segment.
            walk_named(item, "_0", path);
            return;
        }
        throw SchemaError("unsupported field kind: " + path);
      }
    }
    throw SchemaError("unsupported field kind: " + path);
  }

  void walk_named(const FieldDescriptor& field, const std::string& name,
                  const std::string& prefix) {
    if (!valid_field_name(name)) {
      throw SchemaError("invalid field name: '" + name + "'");
    }
    std::string path = prefix.empty() ? name : prefix + "." + name;
    check_path(path);
    walk(field, path);
  }

  void walk_members(const std::vector<FieldDescriptor>& members,
                    const std::string& prefix) {
    for (const FieldDescriptor& m : members) {
      walk_named(m, m.name, prefix);
    }
  }
};

void serialize_field(ByteWriter& w, const FieldDescriptor& f) {
  w.str(f.name);
  w.u8(static_cast<std::uint8_t>(f.kind));
  w.u8(static_cast<std::uint8_t>(f.scalar));
  w.u32(static_cast<std::uint32_t>(f.children.size()));
  for (const FieldDescriptor& c : f.children) serialize_field(w, c);
}

FieldDescriptor deserialize_field(ByteReader& r, int depth) {
  if (depth > 64) throw CorruptionError("schema nesting too deep");
  FieldDescriptor f;
  f.name = r.str();
  auto kind = r.u8();
  if (kind > 2) throw CorruptionError("unknown field kind tag");
  f.kind = static_cast<FieldDescriptor::Kind>(kind);
  auto scalar = r.u8();
  if (scalar > 4) throw CorruptionError("unknown scalar type tag");
  f.scalar = static_cast<ScalarType>(scalar);
  std::uint32_t n = r.u32();
  f.children.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    f.children.push_back(deserialize_field(r, depth + 1));
  }
  return f;
}

} // namespace

FieldDescriptor make_scalar(std::string name, ScalarType type) {
  FieldDescriptor f;
  f.name = std::move(name);
  f.kind = FieldDescriptor::Kind::kScalar;
  f.scalar = type;
  return f;
}

FieldDescriptor make_vector(std::string name, FieldDescriptor item) {
  FieldDescriptor f;
  f.name = std::move(name);
  f.kind = FieldDescriptor::Kind::kVector;
  f.children.push_back(std::move(item));
  return f;
}

FieldDescriptor make_record(std::string name, std::vector<FieldDescriptor> members) {
  FieldDescriptor f;
  f.name = std::move(name);
  f.kind = FieldDescriptor::Kind::kRecord;
  f.children = std::move(members);
  return f;
}

FieldDescriptor item_scalar(ScalarType type) { return make_scalar("", type); }

FieldDescriptor item_record(std::vector<FieldDescriptor> members) {
  return make_record("", std::move(members));
}

FieldDescriptor item_vector(FieldDescriptor inner) {
  return make_vector("", std::move(inner));
}

std::size_t physical_width(PhysicalType type) {
  switch (type) {
    case PhysicalType::kInt32: return 4;
    case PhysicalType::kInt64: return 8;
    case PhysicalType::kFloat32: return 4;
    case PhysicalType::kFloat64: return 8;
    case PhysicalType::kPackedBool: return 0;
    case PhysicalType::kIndex64: return 8;
  }
  throw SchemaError("unknown physical type");
}

const char* physical_name(PhysicalType type) {
  switch (type) {
    case PhysicalType::kInt32: return "Int32";
    case PhysicalType::kInt64: return "Int64";
    case PhysicalType::kFloat32: return "Float32";
    case PhysicalType::kFloat64: return "Float64";
    case PhysicalType::kPackedBool: return "PackedBool";
    case PhysicalType::kIndex64: return "Index64";
  }
  return "?";
}

std::vector<ColumnDescriptor> columns_for_schema(const std::vector<FieldDescriptor>& fields) {
  if (fields.empty()) throw SchemaError("schema has no fields");
  Flattener fl;
  fl.walk_members(fields, "");
  return std::move(fl.columns);
}

Schema::Schema(std::vector<FieldDescriptor> fields)
    : fields_(std::move(fields)), columns_(columns_for_schema(fields_)) {}

const ColumnDescriptor& Schema::column_for(const std::string& qualified_name,
                                           ColumnRole role) const {
  for (const ColumnDescriptor& c : columns_) {
    if (c.role == role && c.source_field == qualified_name) return c;
  }
  throw SchemaError("unknown field: " + qualified_name);
}

bool Schema::has_column(const std::string& qualified_name, ColumnRole role) const {
  for (const ColumnDescriptor& c : columns_) {
    if (c.role == role && c.source_field == qualified_name) return true;
  }
  return false;
}

void Schema::serialize(ByteWriter& w) const {
  w.u32(static_cast<std::uint32_t>(fields_.size()));
  for (const FieldDescriptor& f : fields_) serialize_field(w, f);
}

Schema Schema::deserialize(ByteReader& r) {
  std::uint32_t n = r.u32();
  std::vector<FieldDescriptor> fields;
  fields.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    fields.push_back(deserialize_field(r, 0));
  }
  try {
    return Schema(std::move(fields));
  } catch (const SchemaError& e) {
    throw CorruptionError(std::string("stored schema invalid: ") + e.what());
  }
}

} // namespace cntuple
