#include "gtdb/storage/value.hpp"

#include <cstring>
#include <sstream>

#include "gtdb/common/rng.hpp"

namespace gtdb {

const char* to_string(StoreErrc code) {
    switch (code) {
        case StoreErrc::EmptyLabels: return "EmptyLabels";
        case StoreErrc::UnknownNode: return "UnknownNode";
        case StoreErrc::UnknownEdge: return "UnknownEdge";
        case StoreErrc::DuplicateId: return "DuplicateId";
        case StoreErrc::IndexNotFound: return "IndexNotFound";
        case StoreErrc::ReadOnly: return "ReadOnly";
        case StoreErrc::WriteConflict: return "WriteConflict";
        case StoreErrc::TooManyLabels: return "TooManyLabels";
        case StoreErrc::TypeMismatch: return "TypeMismatch";
        case StoreErrc::Io: return "Io";
        case StoreErrc::Corrupt: return "Corrupt";
    }
    return "Unknown";
}

bool operator==(const PropertyValue& a, const PropertyValue& b) {
    if (a.v_.index() != b.v_.index()) {
        throw StoreError(StoreErrc::TypeMismatch,
                         "cannot compare " + a.to_string() + " with " + b.to_string());
    }
    return a.v_ == b.v_;
}

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

template <typename T>
void put(std::string& out, const T& v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(std::span<const std::byte> bytes, std::size_t off) {
    if (off + sizeof(T) > bytes.size()) throw StoreError(StoreErrc::Corrupt, "truncated property payload");
    T v;
    std::memcpy(&v, bytes.data() + off, sizeof(T));
    return v;
}

} // namespace

std::uint64_t PropertyValue::stable_hash() const noexcept {
    std::uint64_t h = kFnvOffset;
    const auto t = static_cast<std::uint8_t>(tag());
    h = fnv(h, &t, 1);
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::string>) {
                h = fnv(h, x.data(), x.size());
            } else if constexpr (std::is_same_v<T, FloatVector>) {
                h = fnv(h, x.data(), x.size() * sizeof(float));
            } else {
                h = fnv(h, &x, sizeof(x));
            }
        },
        v_);
    return h;
}

void PropertyValue::encode_payload(std::string& out) const {
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::string>) {
                out.append(x);
            } else if constexpr (std::is_same_v<T, FloatVector>) {
                put(out, static_cast<std::uint32_t>(x.size()));
                out.append(reinterpret_cast<const char*>(x.data()), x.size() * sizeof(float));
            } else {
                put(out, x);
            }
        },
        v_);
}

PropertyValue PropertyValue::decode_payload(ValueTag tag, std::span<const std::byte> bytes) {
    switch (tag) {
        case ValueTag::String:
            return PropertyValue(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
        case ValueTag::Int:
            return PropertyValue(take<std::int64_t>(bytes, 0));
        case ValueTag::Float:
            return PropertyValue(take<double>(bytes, 0));
        case ValueTag::FloatVec: {
            const auto n = take<std::uint32_t>(bytes, 0);
            if (4 + std::size_t{n} * sizeof(float) > bytes.size())
                throw StoreError(StoreErrc::Corrupt, "truncated float vector");
            FloatVector v(n);
            std::memcpy(v.data(), bytes.data() + 4, n * sizeof(float));
            return PropertyValue(std::move(v));
        }
    }
    throw StoreError(StoreErrc::Corrupt, "unknown property tag");
}

std::string PropertyValue::to_string() const {
    std::ostringstream os;
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::string>) {
                os << '"' << x << '"';
            } else if constexpr (std::is_same_v<T, FloatVector>) {
                os << '[';
                for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
                os << ']';
            } else {
                os << x;
            }
        },
        v_);
    return os.str();
}

std::optional<ExternalId> to_external_id(const PropertyValue& v) {
    if (v.is_int()) return ExternalId(v.as_int());
    if (v.is_string()) return ExternalId(v.as_string());
    return std::nullopt;
}

PropertyValue to_property(const ExternalId& id) {
    return std::visit([](const auto& x) { return PropertyValue(x); }, id);
}

std::string to_string(const ExternalId& id) {
    if (auto* i = std::get_if<std::int64_t>(&id)) return std::to_string(*i);
    return std::get<std::string>(id);
}

std::size_t ExternalIdHash::operator()(const ExternalId& id) const noexcept {
    if (auto* i = std::get_if<std::int64_t>(&id)) return static_cast<std::size_t>(mix64(static_cast<std::uint64_t>(*i)));
    return std::hash<std::string>{}(std::get<std::string>(id)) ^ 0x5bd1e995u;
}

} // namespace gtdb
