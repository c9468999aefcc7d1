#include "gtdb/query/value.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "gtdb/common/rng.hpp"
#include "gtdb/query/errors.hpp"

namespace gtdb::query {

const char* to_string(QueryErrc code) {
    switch (code) {
        case QueryErrc::Syntax: return "SyntaxError";
        case QueryErrc::MissingParameter: return "MissingParameter";
        case QueryErrc::TypeMismatch: return "TypeMismatch";
        case QueryErrc::UnboundVariable: return "UnboundVariable";
        case QueryErrc::UnsupportedConstruct: return "UnsupportedConstruct";
        case QueryErrc::Runtime: return "ExecutionError";
    }
    return "QueryError";
}

namespace {

std::string describe_expected(const std::set<std::string>& expected) {
    std::string s;
    for (const auto& e : expected) {
        if (!s.empty()) s += ", ";
        s += e;
    }
    return s;
}

[[noreturn]] void type_error(const Value& v, const char* want) {
    throw QueryError(QueryErrc::TypeMismatch, std::string("expected ") + want + ", got " + v.type_name());
}

} // namespace

SyntaxError::SyntaxError(int line, int column, std::set<std::string> expected, const std::string& found)
    : QueryError(QueryErrc::Syntax, "line " + std::to_string(line) + ", column " + std::to_string(column) +
                                        ": expected one of {" + describe_expected(expected) + "} but found " +
                                        found),
      line_(line), column_(column), expected_(std::move(expected)) {}

Value Value::from_property(const PropertyValue& p) {
    return std::visit([](const auto& x) { return Value(x); }, p.storage());
}

Value Value::from_external_id(const ExternalId& id) {
    return std::visit([](const auto& x) { return Value(x); }, id);
}

bool Value::as_bool() const {
    if (auto* p = std::get_if<bool>(&v_)) return *p;
    type_error(*this, "boolean");
}
std::int64_t Value::as_int() const {
    if (auto* p = std::get_if<std::int64_t>(&v_)) return *p;
    type_error(*this, "integer");
}
double Value::as_number() const {
    if (auto* p = std::get_if<std::int64_t>(&v_)) return static_cast<double>(*p);
    if (auto* p = std::get_if<double>(&v_)) return *p;
    type_error(*this, "number");
}
const std::string& Value::as_string() const {
    if (auto* p = std::get_if<std::string>(&v_)) return *p;
    type_error(*this, "string");
}
const FloatVector& Value::as_vector() const {
    if (auto* p = std::get_if<FloatVector>(&v_)) return *p;
    type_error(*this, "float vector");
}
const List& Value::as_list() const {
    if (auto* p = std::get_if<std::shared_ptr<const List>>(&v_)) return **p;
    type_error(*this, "list");
}
NodeRef Value::as_node() const {
    if (auto* p = std::get_if<NodeRef>(&v_)) return *p;
    type_error(*this, "node");
}
EdgeRef Value::as_edge() const {
    if (auto* p = std::get_if<EdgeRef>(&v_)) return *p;
    type_error(*this, "relationship");
}

const char* Value::type_name() const noexcept {
    static constexpr const char* names[] = {"null", "boolean", "integer", "float", "string",
                                            "float vector", "list", "node", "relationship"};
    return names[v_.index()];
}

bool operator==(const Value& a, const Value& b) {
    if (a.is_number() && b.is_number()) {
        if (a.is_int() && b.is_int()) return a.as_int() == b.as_int();
        return a.as_number() == b.as_number();
    }
    if (a.v_.index() != b.v_.index()) return false;
    if (a.is_list()) return a.as_list() == b.as_list();
    return a.v_ == b.v_;
}

Value equals(const Value& a, const Value& b) {
    if (a.is_null() || b.is_null()) return Value();
    if (a.is_list() && b.is_list()) {
        const auto& x = a.as_list();
        const auto& y = b.as_list();
        if (x.size() != y.size()) return Value(false);
        bool saw_null = false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const Value e = equals(x[i], y[i]);
            if (e.is_null()) {
                saw_null = true;
            } else if (!e.as_bool()) {
                return Value(false);
            }
        }
        return saw_null ? Value() : Value(true);
    }
    return Value(a == b);
}

std::size_t hash_value(const Value& v) noexcept {
    const auto& s = v.storage();
    std::uint64_t h = mix64(s.index());
    if (v.is_float()) {
        const double d = v.as_number();
        if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 9.2e18) {
            return mix64(static_cast<std::uint64_t>(static_cast<std::int64_t>(d)) ^ mix64(2));
        }
        std::uint64_t bits;
        std::memcpy(&bits, &d, sizeof bits);
        return mix64(bits ^ h);
    }
    if (v.is_int()) return mix64(static_cast<std::uint64_t>(v.as_int()) ^ mix64(2));
    if (v.is_bool()) return mix64(h ^ (v.as_bool() ? 1 : 0));
    if (v.is_string()) return h ^ std::hash<std::string>{}(v.as_string());
    if (v.is_vector()) {
        for (float f : v.as_vector()) {
            std::uint32_t bits;
            std::memcpy(&bits, &f, sizeof bits);
            h = mix64(h ^ bits);
        }
        return h;
    }
    if (v.is_list()) {
        for (const auto& e : v.as_list()) h = mix64(h ^ hash_value(e));
        return h;
    }
    if (v.is_node()) return mix64(h ^ v.as_node().id);
    if (v.is_edge()) return mix64(h ^ v.as_edge().id);
    return h;
}

std::size_t ValuesHash::operator()(const std::vector<Value>& vs) const noexcept {
    std::uint64_t h = 0x51ed27;
    for (const auto& v : vs) h = mix64(h ^ hash_value(v));
    return h;
}

namespace {

int sort_rank(const Value& v) {
    if (v.is_number()) return 0;
    if (v.is_string()) return 1;
    if (v.is_bool()) return 2;
    if (v.is_vector()) return 3;
    if (v.is_list()) return 4;
    if (v.is_node()) return 5;
    if (v.is_edge()) return 6;
    return 7; // null sorts last
}

template <typename T>
int cmp3(const T& a, const T& b) {
    return a < b ? -1 : (b < a ? 1 : 0);
}

} // namespace

int compare_for_sort(const Value& a, const Value& b) {
    const int ra = sort_rank(a);
    const int rb = sort_rank(b);
    if (ra != rb) return ra < rb ? -1 : 1;
    switch (ra) {
        case 0:
            if (a.is_int() && b.is_int()) return cmp3(a.as_int(), b.as_int());
            return cmp3(a.as_number(), b.as_number());
        case 1: return cmp3(a.as_string(), b.as_string());
        case 2: return cmp3(a.as_bool(), b.as_bool());
        case 3: return cmp3(a.as_vector(), b.as_vector());
        case 4: {
            const auto& x = a.as_list();
            const auto& y = b.as_list();
            for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
                if (int c = compare_for_sort(x[i], y[i])) return c;
            }
            return cmp3(x.size(), y.size());
        }
        case 5: return cmp3(a.as_node().id, b.as_node().id);
        case 6: return cmp3(a.as_edge().id, b.as_edge().id);
        default: return 0;
    }
}

std::size_t Value::footprint() const noexcept {
    std::size_t n = sizeof(Value);
    if (is_string()) {
        const auto& s = as_string();
        if (s.capacity() > 15) n += s.capacity() + 1;
    } else if (is_vector()) {
        n += as_vector().capacity() * sizeof(float);
    } else if (is_list()) {
        n += sizeof(List);
        for (const auto& e : as_list()) n += e.footprint();
    }
    return n;
}

std::size_t row_footprint(const Row& r) noexcept {
    std::size_t n = sizeof(Row);
    for (const auto& v : r) n += v.footprint();
    return n;
}

namespace {

void render(std::ostringstream& os, const Value& v, bool nested) {
    if (v.is_null()) {
        os << "null";
    } else if (v.is_bool()) {
        os << (v.as_bool() ? "true" : "false");
    } else if (v.is_int()) {
        os << v.as_int();
    } else if (v.is_float()) {
        os << v.as_number();
    } else if (v.is_string()) {
        if (nested) {
            os << '\'' << v.as_string() << '\'';
        } else {
            os << v.as_string();
        }
    } else if (v.is_vector()) {
        os << '[';
        const auto& f = v.as_vector();
        for (std::size_t i = 0; i < f.size(); ++i) os << (i ? ", " : "") << f[i];
        os << ']';
    } else if (v.is_list()) {
        os << '[';
        const auto& l = v.as_list();
        for (std::size_t i = 0; i < l.size(); ++i) {
            if (i) os << ", ";
            render(os, l[i], true);
        }
        os << ']';
    } else if (v.is_node()) {
        os << "(" << v.as_node().id << ")";
    } else {
        os << "[" << v.as_edge().id << "]";
    }
}

} // namespace

std::string Value::to_string() const {
    std::ostringstream os;
    os.precision(9);
    render(os, *this, false);
    return os.str();
}

} // namespace gtdb::query
