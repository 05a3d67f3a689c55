#pragma once

#include "cntuple/bytes.hpp"
#include "cntuple/errors.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cntuple {

// Logical scalar types storable in a field.
enum class ScalarType : std::uint8_t {
  kInt32 = 0,
  kInt64 = 1,
  kFloat32 = 2,
  kFloat64 = 3,
  kBool = 4,
};

// One node of the record schema tree. Three kinds:
//   Scalar: a leaf of one ScalarType;
//   Vector: variable-length collection, exactly one anonymous child (the
//           item type);
//   Record: named group of member fields (structs are flattened to their
//           members at column level, the record itself yields no column).
struct FieldDescriptor {
  enum class Kind : std::uint8_t { kScalar = 0, kVector = 1, kRecord = 2 };

  std::string name; // empty only for a vector's item descriptor
  Kind kind = Kind::kScalar;
  ScalarType scalar = ScalarType::kInt32; // meaningful for kScalar
  std::vector<FieldDescriptor> children;  // members (kRecord) or {item} (kVector)
};

FieldDescriptor make_scalar(std::string name, ScalarType type);
FieldDescriptor make_vector(std::string name, FieldDescriptor item);
FieldDescriptor make_record(std::string name, std::vector<FieldDescriptor> members);

// Anonymous item descriptors for vector inners.
FieldDescriptor item_scalar(ScalarType type);
FieldDescriptor item_record(std::vector<FieldDescriptor> members);
FieldDescriptor item_vector(FieldDescriptor inner);

// Physical element types of flattened columns.
enum class PhysicalType : std::uint8_t {
  kInt32 = 0,
  kInt64 = 1,
  kFloat32 = 2,
  kFloat64 = 3,
  kPackedBool = 4, // 8 bools per octet, LSB first
  kIndex64 = 5,    // unsigned 64-bit end offsets of a vector column
};

// Fixed element width in bytes; PackedBool has sub-byte elements and returns 0.
std::size_t physical_width(PhysicalType type);
const char* physical_name(PhysicalType type);

enum class ColumnRole : std::uint8_t { kValue = 0, kIndex = 1 };

struct ColumnDescriptor {
  std::uint32_t column_id = 0;
  ColumnRole role = ColumnRole::kValue;
  PhysicalType element_type = PhysicalType::kInt32;
  std::string source_field; // dot-joined qualified field name

  friend bool operator==(const ColumnDescriptor&, const ColumnDescriptor&) = default;
};

// A validated top-level schema: an ordered list of named fields.
class Schema {
public:
  Schema() = default;
  explicit Schema(std::vector<FieldDescriptor> fields);

  const std::vector<FieldDescriptor>& fields() const { return fields_; }
  const std::vector<ColumnDescriptor>& columns() const { return columns_; }

  // Index into columns() for a qualified field name + role, or throws.
  const ColumnDescriptor& column_for(const std::string& qualified_name,
                                     ColumnRole role) const;
  bool has_column(const std::string& qualified_name, ColumnRole role) const;

  void serialize(ByteWriter& w) const;
  static Schema deserialize(ByteReader& r);

  friend bool operator==(const Schema& a, const Schema& b) {
    return a.columns_ == b.columns_; // columns are a faithful digest of the tree
  }

private:
  std::vector<FieldDescriptor> fields_;
  std::vector<ColumnDescriptor> columns_;
};

// Flattens a schema tree to its ordered column list. Deterministic depth-first
// order; the index column of a vector precedes the columns of its inner type.
// Throws SchemaError on invalid trees (bad names, duplicate qualified names,
// malformed vector/record shapes).
std::vector<ColumnDescriptor> columns_for_schema(const std::vector<FieldDescriptor>& fields);

} // namespace cntuple
