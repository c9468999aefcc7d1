#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "gtdb/storage/records.hpp"
#include "gtdb/storage/value.hpp"

namespace gtdb::query {

struct Null {
    friend bool operator==(Null, Null) { return true; }
};
struct NodeRef {
    NodeId id;
    friend bool operator==(NodeRef, NodeRef) = default;
};
struct EdgeRef {
    EdgeId id;
    friend bool operator==(EdgeRef, EdgeRef) = default;
};

class Value;
using List = std::vector<Value>;

/// A runtime value flowing through query rows.
class Value {
public:
    using Storage = std::variant<Null, bool, std::int64_t, double, std::string, FloatVector,
                                 std::shared_ptr<const List>, NodeRef, EdgeRef>;

    Value() = default;
    Value(Null) {}
    Value(bool b) : v_(b) {}
    Value(std::int64_t i) : v_(i) {}
    Value(int i) : v_(std::int64_t{i}) {}
    Value(double d) : v_(d) {}
    Value(std::string s) : v_(std::move(s)) {}
    Value(const char* s) : v_(std::string(s)) {}
    Value(FloatVector v) : v_(std::move(v)) {}
    Value(List l) : v_(std::make_shared<const List>(std::move(l))) {}
    Value(NodeRef n) : v_(n) {}
    Value(EdgeRef e) : v_(e) {}

    static Value from_property(const PropertyValue& p);
    static Value from_external_id(const ExternalId& id);

    bool is_null() const noexcept { return std::holds_alternative<Null>(v_); }
    bool is_bool() const noexcept { return std::holds_alternative<bool>(v_); }
    bool is_int() const noexcept { return std::holds_alternative<std::int64_t>(v_); }
    bool is_float() const noexcept { return std::holds_alternative<double>(v_); }
    bool is_number() const noexcept { return is_int() || is_float(); }
    bool is_string() const noexcept { return std::holds_alternative<std::string>(v_); }
    bool is_vector() const noexcept { return std::holds_alternative<FloatVector>(v_); }
    bool is_list() const noexcept { return std::holds_alternative<std::shared_ptr<const List>>(v_); }
    bool is_node() const noexcept { return std::holds_alternative<NodeRef>(v_); }
    bool is_edge() const noexcept { return std::holds_alternative<EdgeRef>(v_); }

    bool as_bool() const;
    std::int64_t as_int() const;
    double as_number() const;
    const std::string& as_string() const;
    const FloatVector& as_vector() const;
    const List& as_list() const;
    NodeRef as_node() const;
    EdgeRef as_edge() const;

    const Storage& storage() const noexcept { return v_; }
    const char* type_name() const noexcept;

    /// Structural equality: null equals null, 1 equals 1.0. Used for grouping,
    /// DISTINCT and tests; the query `=` operator is `equals`.
    friend bool operator==(const Value& a, const Value& b);

    /// Approximate heap + inline bytes held by this value.
    std::size_t footprint() const noexcept;

    /// Text rendering used by the CLI: null, [1.5, 2], 'quoted' only inside lists.
    std::string to_string() const;

private:
    Storage v_;
};

std::size_t hash_value(const Value& v) noexcept;

struct ValueHash {
    std::size_t operator()(const Value& v) const noexcept { return hash_value(v); }
};
struct ValuesHash {
    std::size_t operator()(const std::vector<Value>& v) const noexcept;
};

/// Three-valued Cypher equality: null when either side is null.
Value equals(const Value& a, const Value& b);

/// Total order used by ORDER BY: numbers < strings < booleans < others, null last.
int compare_for_sort(const Value& a, const Value& b);

using Row = std::vector<Value>;

std::size_t row_footprint(const Row& r) noexcept;

} // namespace gtdb::query
