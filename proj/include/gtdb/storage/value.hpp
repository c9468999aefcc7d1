#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gtdb/common/error.hpp"

namespace gtdb {

using FloatVector = std::vector<float>;

enum class ValueTag : std::uint8_t { String = 1, Int = 2, Float = 3, FloatVec = 4 };

/// A stored property value. Comparisons across different tags are errors.
class PropertyValue {
public:
    using Storage = std::variant<std::string, std::int64_t, double, FloatVector>;

    PropertyValue() : v_(std::int64_t{0}) {}
    PropertyValue(std::string s) : v_(std::move(s)) {}
    PropertyValue(const char* s) : v_(std::string(s)) {}
    PropertyValue(std::int64_t i) : v_(i) {}
    PropertyValue(int i) : v_(std::int64_t{i}) {}
    PropertyValue(double d) : v_(d) {}
    PropertyValue(FloatVector v) : v_(std::move(v)) {}
    PropertyValue(std::initializer_list<float> v) : v_(FloatVector(v)) {}

    ValueTag tag() const noexcept { return static_cast<ValueTag>(v_.index() + 1); }

    bool is_string() const noexcept { return std::holds_alternative<std::string>(v_); }
    bool is_int() const noexcept { return std::holds_alternative<std::int64_t>(v_); }
    bool is_float() const noexcept { return std::holds_alternative<double>(v_); }
    bool is_vector() const noexcept { return std::holds_alternative<FloatVector>(v_); }

    const std::string& as_string() const { return get<std::string>("string"); }
    std::int64_t as_int() const { return get<std::int64_t>("integer"); }
    double as_float() const { return get<double>("float"); }
    const FloatVector& as_vector() const { return get<FloatVector>("float vector"); }

    const Storage& storage() const noexcept { return v_; }

    /// Throws StoreError(TypeMismatch) when the tags differ.
    friend bool operator==(const PropertyValue& a, const PropertyValue& b);

    /// Stable 64-bit hash (FNV-1a over tag and payload bytes); persisted in index files.
    std::uint64_t stable_hash() const noexcept;

    /// Binary payload encoding used in props.dat (see docs/storage_format.md).
    void encode_payload(std::string& out) const;
    static PropertyValue decode_payload(ValueTag tag, std::span<const std::byte> bytes);

    std::string to_string() const;

private:
    template <typename T>
    const T& get(const char* what) const {
        if (auto* p = std::get_if<T>(&v_)) return *p;
        throw StoreError(StoreErrc::TypeMismatch, std::string("property is not a ") + what);
    }

    Storage v_;
};

using PropertyMap = std::map<std::string, PropertyValue>;

/// The user-facing `id` of a node: integer or string. Unlike PropertyValue,
/// ids of different kinds simply compare unequal.
using ExternalId = std::variant<std::int64_t, std::string>;

std::optional<ExternalId> to_external_id(const PropertyValue& v);
PropertyValue to_property(const ExternalId& id);
std::string to_string(const ExternalId& id);

struct ExternalIdHash {
    std::size_t operator()(const ExternalId& id) const noexcept;
};

} // namespace gtdb
