#include "gtdb/ingest/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

#include "gtdb/common/rng.hpp"

namespace gtdb::ingest {

const char* to_string(IngestErrc code) {
    switch (code) {
        case IngestErrc::MalformedRow: return "MalformedRow";
        case IngestErrc::DuplicateId: return "DuplicateId";
        case IngestErrc::UnknownEndpoint: return "UnknownEndpoint";
        case IngestErrc::BadSpec: return "BadSpec";
    }
    return "?";
}

IngestError::IngestError(IngestErrc code, std::string file, std::size_t line, const std::string& msg)
    : Error(std::string(to_string(code)) + ": " + file + (line ? ":" + std::to_string(line) : "") + ": " + msg),
      code_(code), file_(std::move(file)), line_(line) {}

namespace {

// Splits one CSV record. Fields may be double-quoted with "" as an escaped quote.
std::optional<std::vector<std::string>> split_csv(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) return std::nullopt;
    out.push_back(std::move(cur));
    return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

PropertyValue infer(const std::string& s) {
    if (auto i = parse_number<std::int64_t>(s)) return PropertyValue(*i);
    if (auto d = parse_number<double>(s)) return PropertyValue(*d);
    return PropertyValue(s);
}

ExternalId parse_id(const std::string& s) {
    if (auto i = parse_number<std::int64_t>(s)) return *i;
    return s;
}

class CsvReader {
public:
    explicit CsvReader(const std::filesystem::path& p) : path_(p.string()), in_(p) {
        if (!in_) throw IngestError(IngestErrc::BadSpec, path_, 0, "cannot open file");
        auto h = next();
        if (!h) throw IngestError(IngestErrc::MalformedRow, path_, 1, "missing header row");
        header_ = *h;
    }

    std::optional<std::vector<std::string>> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            auto fields = split_csv(line);
            if (!fields) fail("unterminated quote");
            if (!header_.empty() && fields->size() != header_.size()) {
                fail("expected " + std::to_string(header_.size()) + " fields, got " + std::to_string(fields->size()));
            }
            return fields;
        }
        return std::nullopt;
    }

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header_.size(); ++i) {
            if (header_[i] == name) return i;
        }
        throw IngestError(IngestErrc::MalformedRow, path_, 1, "no column `" + name + "`");
    }

    [[noreturn]] void fail(const std::string& msg, IngestErrc code = IngestErrc::MalformedRow) const {
        throw IngestError(code, path_, line_no_, msg);
    }

    const std::vector<std::string>& header() const { return header_; }

private:
    std::string path_;
    std::ifstream in_;
    std::vector<std::string> header_;
    std::size_t line_no_ = 0;
};

FloatVector parse_features(const std::string& s, std::size_t dim, const CsvReader& r) {
    FloatVector out;
    out.reserve(dim);
    std::size_t start = 0;
    while (!s.empty() && start <= s.size()) {
        auto end = s.find(';', start);
        if (end == std::string::npos) end = s.size();
        auto v = parse_number<float>(std::string_view(s).substr(start, end - start));
        if (!v) r.fail("bad feature value `" + s.substr(start, end - start) + "`");
        out.push_back(*v);
        start = end + 1;
    }
    if (out.size() != dim) {
        r.fail("expected " + std::to_string(dim) + " features, got " + std::to_string(out.size()));
    }
    return out;
}

// Geometric skipping over a run of Bernoulli(p) trials: the gap to the next success.
std::uint64_t skip(Rng& rng, double log_q) {
    double u = 1.0 - uniform01(rng); // (0, 1]
    const double g = std::floor(std::log(u) / log_q);
    return g >= 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(g);
}

// Visits each index in [0, n) independently with probability p.
template <typename F>
void bernoulli_indices(Rng& rng, std::uint64_t n, double p, F&& visit) {
    if (p <= 0.0 || n == 0) return;
    if (p >= 1.0) {
        for (std::uint64_t i = 0; i < n; ++i) visit(i);
        return;
    }
    const double log_q = std::log1p(-p);
    std::uint64_t i = skip(rng, log_q);
    while (i < n) {
        visit(i);
        const auto g = skip(rng, log_q);
        if (g >= n) break;
        i += g + 1;
    }
}

} // namespace

LoadCounts load_csv(const IngestSpec& spec, GraphStore& store) {
    LoadCounts counts;
    std::map<std::string, std::unordered_map<ExternalId, NodeId, ExternalIdHash>> ids;
    for (const auto& nf : spec.node_files) {
        CsvReader r(nf.path);
        const auto id_col = r.column(spec.id_column);
        auto& by_id = ids[nf.label];
        const std::vector<std::string> labels{nf.label};
        while (auto row = r.next()) {
            PropertyMap props;
            for (std::size_t i = 0; i < row->size(); ++i) {
                const auto& name = r.header()[i];
                const auto& field = (*row)[i];
                if (i == id_col) {
                    if (field.empty()) r.fail("empty id");
                    props[name] = to_property(parse_id(field));
                } else if (name == "features") {
                    props[name] = parse_features(field, spec.feature_dim, r);
                } else if (name == "label") {
                    auto cls = parse_number<std::int64_t>(field);
                    if (!cls) r.fail("class label `" + field + "` is not an integer");
                    props[name] = *cls;
                } else if (!field.empty()) {
                    props[name] = infer(field);
                }
            }
            const ExternalId ext = parse_id((*row)[id_col]);
            if (by_id.count(ext)) r.fail("duplicate id " + gtdb::to_string(ext), IngestErrc::DuplicateId);
            by_id.emplace(ext, store.create_node(std::span<const std::string>(labels), props));
            ++counts.nodes_loaded;
        }
    }
    for (const auto& ef : spec.edge_files) {
        CsvReader r(ef.path);
        const auto src_col = r.column(ef.src_column);
        const auto dst_col = r.column(ef.dst_column);
        auto resolve = [&](const std::string& field, const std::optional<std::string>& label) -> NodeId {
            const ExternalId ext = parse_id(field);
            std::optional<NodeId> found;
            for (const auto& [l, by_id] : ids) {
                if (label && l != *label) continue;
                auto it = by_id.find(ext);
                if (it == by_id.end()) continue;
                if (found) r.fail("id " + field + " exists under several labels", IngestErrc::UnknownEndpoint);
                found = it->second;
            }
            if (!found) r.fail("no node with id " + field, IngestErrc::UnknownEndpoint);
            return *found;
        };
        while (auto row = r.next()) {
            const NodeId src = resolve((*row)[src_col], ef.src_label);
            const NodeId dst = resolve((*row)[dst_col], ef.dst_label);
            PropertyMap props;
            for (std::size_t i = 0; i < row->size(); ++i) {
                if (i != src_col && i != dst_col && !(*row)[i].empty()) props[r.header()[i]] = infer((*row)[i]);
            }
            store.create_edge(src, dst, ef.rel_type, props);
            ++counts.edges_loaded;
        }
    }
    store.flush();
    return counts;
}

double SbmSpec::expected_edges() const {
    const double n = static_cast<double>(nodes_per_community);
    const double c = static_cast<double>(communities);
    return c * n * (n - 1) * p_in + c * n * (c - 1) * n * p_out;
}

void validate(const SbmSpec& s) {
    auto bad = [](const std::string& msg) { throw IngestError(IngestErrc::BadSpec, "sbm", 0, msg); };
    if (s.communities == 0 || s.nodes_per_community == 0) bad("communities and nodes per community must be positive");
    if (!(s.p_out >= 0.0 && s.p_out <= s.p_in && s.p_in <= 1.0)) bad("need 0 <= p_out <= p_in <= 1");
    if (s.feature_noise < 0.0 || s.centroid_scale < 0.0) bad("noise and centroid scale must be non-negative");
    if (s.node_label.empty() || s.rel_type.empty()) bad("empty label or relationship type");
}

LoadCounts generate_sbm(const SbmSpec& spec, GraphStore& store) {
    validate(spec);
    const std::uint64_t classes = spec.num_classes();
    const std::uint64_t n = spec.nodes_per_community;
    const std::uint64_t total = spec.node_count();

    Rng centroid_rng = make_rng(derive_seed(spec.seed, {0}));
    std::vector<FloatVector> centroids(classes, FloatVector(spec.feature_dim));
    for (auto& c : centroids) {
        for (auto& x : c) x = static_cast<float>(spec.centroid_scale * standard_normal(centroid_rng));
    }

    LoadCounts counts;
    Rng feature_rng = make_rng(derive_seed(spec.seed, {1}));
    const std::vector<std::string> labels{spec.node_label};
    PropertyMap props;
    std::vector<NodeId> node(total);
    for (std::uint64_t i = 0; i < total; ++i) {
        const std::uint64_t cls = (i / n) % classes;
        FloatVector f = centroids[cls];
        for (auto& x : f) x += static_cast<float>(spec.feature_noise * standard_normal(feature_rng));
        props["id"] = static_cast<std::int64_t>(i);
        props["features"] = std::move(f);
        props["label"] = static_cast<std::int64_t>(cls);
        node[i] = store.create_node(std::span<const std::string>(labels), props);
        ++counts.nodes_loaded;
    }

    Rng edge_rng = make_rng(derive_seed(spec.seed, {2}));
    for (std::uint64_t u = 0; u < total; ++u) {
        const std::uint64_t base = (u / n) * n;
        // targets in u's own community, u excluded
        bernoulli_indices(edge_rng, n - 1, spec.p_in, [&](std::uint64_t k) {
            const std::uint64_t v = base + (k >= u - base ? k + 1 : k);
            store.create_edge(node[u], node[v], spec.rel_type);
            ++counts.edges_loaded;
        });
        // targets in every other community
        bernoulli_indices(edge_rng, total - n, spec.p_out, [&](std::uint64_t k) {
            const std::uint64_t v = k < base ? k : k + n;
            store.create_edge(node[u], node[v], spec.rel_type);
            ++counts.edges_loaded;
        });
    }
    store.flush();
    return counts;
}

} // namespace gtdb::ingest
