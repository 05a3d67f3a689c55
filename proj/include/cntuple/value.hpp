#pragma once

#include "cntuple/errors.hpp"
#include "cntuple/schema.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace cntuple {

// Dynamically typed entry value, mirroring the schema tree: scalars, vectors
// of values, and records with positional members.
class Value {
public:
  struct Vec {
    std::vector<Value> items;
    friend bool operator==(const Vec&, const Vec&) = default;
  };
  struct Rec {
    std::vector<Value> members;
    friend bool operator==(const Rec&, const Rec&) = default;
  };

  Value() : v_(std::int32_t{0}) {}

  static Value i32(std::int32_t v) { return Value(v); }
  static Value i64(std::int64_t v) { return Value(v); }
  static Value f32(float v) { return Value(v); }
  static Value f64(double v) { return Value(v); }
  static Value boolean(bool v) { return Value(v); }
  static Value vec(std::vector<Value> items) { return Value(Vec{std::move(items)}); }
  static Value rec(std::vector<Value> members) { return Value(Rec{std::move(members)}); }

  bool is_vec() const { return std::holds_alternative<Vec>(v_); }
  bool is_rec() const { return std::holds_alternative<Rec>(v_); }

  template <typename T>
  const T& as() const {
    const T* p = std::get_if<T>(&v_);
    if (p == nullptr) throw SchemaError("value does not hold the requested type");
    return *p;
  }

  const std::vector<Value>& items() const { return as<Vec>().items; }
  const std::vector<Value>& members() const { return as<Rec>().members; }

  friend bool operator==(const Value&, const Value&) = default;

private:
  template <typename T>
  explicit Value(T v) : v_(std::move(v)) {}

  std::variant<std::int32_t, std::int64_t, float, double, bool, Vec, Rec> v_;
};

// Column ids attached to the schema tree in flattening order. Scalar nodes
// carry their value column, vector nodes their index column; a vector's
// single child binding describes the item type (for scalar items the child
// carries the shared value column).
struct FieldBinding {
  const FieldDescriptor* field = nullptr; // null for a vector's scalar item
  FieldDescriptor::Kind kind = FieldDescriptor::Kind::kScalar;
  ScalarType scalar = ScalarType::kInt32;
  std::uint32_t column = 0;
  std::vector<FieldBinding> children;
};

// One binding per top-level field; ids match columns_for_schema(schema).
std::vector<FieldBinding> build_bindings(const Schema& schema);

// Validates that `entry` matches the schema shape (kinds and member counts).
void check_entry_shape(const std::vector<FieldBinding>& bindings, const Value& entry);

} // namespace cntuple
