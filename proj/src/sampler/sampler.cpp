#include "gtdb/sampler/sampler.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_set>

#include "gtdb/common/memory.hpp"
#include "gtdb/common/rng.hpp"
#include "gtdb/query/executor.hpp"
#include "gtdb/sampler/templates.hpp"

namespace gtdb::sampler {

using query::List;
using query::Params;
using query::Value;

namespace {

std::vector<std::string> sorted_keys(const Value& v) {
    std::set<std::string> keys;
    if (!v.is_null()) {
        for (const auto& k : v.as_list()) keys.insert(k.as_string());
    }
    return {keys.begin(), keys.end()};
}

Value id_list(const std::vector<ExternalId>& ids) {
    List l;
    l.reserve(ids.size());
    for (const auto& id : ids) l.push_back(Value::from_external_id(id));
    return Value(std::move(l));
}

Params template_params(const SamplingConfig& cfg) {
    return Params{{"NODE_TYPE", Value(cfg.node_type)}, {"REL_TYPE", Value(cfg.rel_type)}};
}

std::size_t id_footprint(const ExternalId& id) {
    return sizeof(ExternalId) + (std::holds_alternative<std::string>(id) ? footprint(std::get<std::string>(id)) : 0);
}

void account(SampledSubgraph& g, const query::QueryResult& r) {
    std::uint64_t rows = footprint_shallow(r.rows);
    for (const auto& row : r.rows) rows += query::row_footprint(row);
    g.query_peak_bytes = std::max<std::uint64_t>(g.query_peak_bytes, r.profile.peak_allocated_bytes);
    g.result_bytes = std::max(g.result_bytes, rows);
    g.db_hits += r.profile.total_db_hits;
}

ExternalId require_id(const Value& v, const char* what) {
    auto id = to_external_id(v);
    if (!id) throw DecodeError(std::string(what) + " is " + v.type_name() + ", not an id");
    return *id;
}

FloatVector optional_features(const Value& v, const char* what) {
    if (v.is_null()) return {};
    if (!v.is_vector()) throw DecodeError(std::string(what) + " is " + v.type_name() + ", not a float vector");
    return v.as_vector();
}

// Looks the seeds up by id; unknown ones are dropped, duplicates merged.
SampledSubgraph seed_subgraph(GraphStore& store, const std::vector<ExternalId>& seeds, const SamplingConfig& cfg,
                              std::size_t hops) {
    SampledSubgraph g;
    g.hops.resize(hops);
    auto params = template_params(cfg);
    params["SEED_NODES"] = id_list(seeds);
    const auto res = query::run_query(store, kSeedLookupQuery, params);
    account(g, res);
    for (const auto& row : res.rows) {
        g.add_seed(require_id(row[0], "seed id"), optional_features(row[1], "seed features"),
                   row[2].is_int() ? row[2].as_int() : -1);
    }
    return g;
}

} // namespace

const NodeType* GraphMetadata::node_type(std::string_view label) const {
    for (const auto& t : node_types) {
        if (t.label == label) return &t;
    }
    return nullptr;
}

std::size_t GraphMetadata::footprint() const {
    std::size_t n = sizeof(*this) + footprint_shallow(node_types) + footprint_shallow(edge_types);
    auto keys = [](const std::vector<std::string>& ks) {
        std::size_t b = ks.capacity() * sizeof(std::string);
        for (const auto& k : ks) b += gtdb::footprint(k) - sizeof(std::string);
        return b;
    };
    for (const auto& t : node_types) n += gtdb::footprint(t.label) - sizeof(std::string) + keys(t.keys);
    for (const auto& t : edge_types) {
        n += gtdb::footprint(t.rel_type) + gtdb::footprint(t.source) + gtdb::footprint(t.target) - 3 * sizeof(std::string) + keys(t.keys);
    }
    return n;
}

GraphMetadata fetch_node_metadata(GraphStore& store) {
    GraphMetadata md;
    const auto stats = store.stats();
    const auto types = query::run_query(store, kNodeMetadataQuery);
    for (const auto& row : types.rows) {
        NodeType t{row[0].as_string(), sorted_keys(row[1]), 0, 0};
        t.count = stats.label_count(t.label);
        if (std::binary_search(t.keys.begin(), t.keys.end(), "features")) {
            const auto sample = query::run_query(store, kFeatureSampleQuery, {{"NODE_TYPE", Value(t.label)}});
            if (!sample.rows.empty() && sample.rows[0][0].is_vector()) t.feature_dim = sample.rows[0][0].as_vector().size();
        }
        md.node_types.push_back(std::move(t));
    }
    std::sort(md.node_types.begin(), md.node_types.end(),
              [](const NodeType& a, const NodeType& b) { return a.label < b.label; });
    const auto classes = query::run_query(store, kClassCountQuery);
    md.num_classes = static_cast<std::uint64_t>(classes.rows.at(0).at(0).as_int());
    return md;
}

GraphMetadata fetch_edge_metadata(GraphStore& store) {
    GraphMetadata md;
    const auto res = query::run_query(store, kEdgeMetadataQuery);
    for (const auto& row : res.rows) {
        auto str = [](const Value& v) { return v.is_null() ? std::string() : v.as_string(); };
        md.edge_types.push_back(EdgeType{str(row[0]), str(row[1]), str(row[2]), sorted_keys(row[3]),
                                         static_cast<std::uint64_t>(row[4].as_int())});
    }
    std::sort(md.edge_types.begin(), md.edge_types.end(), [](const EdgeType& a, const EdgeType& b) {
        return std::tie(a.rel_type, a.source, a.target) < std::tie(b.rel_type, b.source, b.target);
    });
    return md;
}

GraphMetadata fetch_metadata(GraphStore& store) {
    auto md = fetch_node_metadata(store);
    md.edge_types = fetch_edge_metadata(store).edge_types;
    return md;
}

void validate(const SamplingConfig& cfg) {
    if (cfg.fanouts.empty()) throw SamplerError("at least one fanout is required");
    for (auto f : cfg.fanouts) {
        if (f == 0) throw SamplerError("fanouts must be positive");
    }
    if (cfg.strategy == Strategy::GlobalLimit && cfg.fanouts.size() != 2) {
        throw SamplerError("the global-limit template samples exactly two hops");
    }
}

std::optional<ExternalId> to_external_id(const Value& v) {
    if (v.is_int()) return ExternalId(v.as_int());
    if (v.is_string()) return ExternalId(v.as_string());
    return std::nullopt;
}

const std::vector<HopEntry>& SampledSubgraph::hop(std::size_t k) const {
    static const std::vector<HopEntry> none;
    return k < hops.size() ? hops[k] : none;
}

std::size_t SampledSubgraph::hop_entries() const {
    std::size_t n = 0;
    for (const auto& h : hops) n += h.size();
    return n;
}

std::uint32_t SampledSubgraph::intern(const ExternalId& id) {
    auto [it, fresh] = local_index.try_emplace(id, static_cast<std::uint32_t>(nodes.size()));
    if (fresh) {
        nodes.push_back(id);
        feature_ref_.push_back(0);
    }
    return it->second;
}

std::uint32_t SampledSubgraph::add_seed(const ExternalId& id, FloatVector features, std::int64_t label) {
    if (auto it = local_index.find(id); it != local_index.end()) return it->second;
    if (nodes.size() != seed_ids.size()) throw SamplerError("seeds must be added before hop entries");
    seed_ids.push_back(id);
    seed_features.push_back(std::move(features));
    seed_labels.push_back(label);
    return intern(id);
}

std::uint32_t SampledSubgraph::add_hop(std::size_t k, std::uint32_t parent, const ExternalId& id,
                                       FloatVector features) {
    if (k >= hops.size()) hops.resize(k + 1);
    const auto local = intern(id);
    if (local >= seed_ids.size() && feature_ref_[local] == 0 && !features.empty()) {
        feature_ref_[local] = ((static_cast<std::uint64_t>(k) << 32) | hops[k].size()) + 1;
    }
    hops[k].push_back({parent, local, std::move(features)});
    if (edge_set_.insert((static_cast<std::uint64_t>(parent) << 32) | local).second) {
        edge_pairs.emplace_back(parent, local);
    }
    return local;
}

const FloatVector& SampledSubgraph::features(std::uint32_t local) const {
    static const FloatVector none;
    if (local < seed_features.size()) return seed_features[local];
    const auto ref = feature_ref_.at(local);
    if (ref == 0) return none;
    return hops[(ref - 1) >> 32][(ref - 1) & 0xffffffffu].features;
}

std::size_t SampledSubgraph::footprint() const {
    std::size_t n = sizeof(*this) + footprint_shallow(seed_ids) + footprint_shallow(hops) +
                    footprint_shallow(nodes) + footprint_shallow(seed_features) + footprint_shallow(seed_labels) +
                    footprint_shallow(edge_pairs) + footprint_shallow(feature_ref_);
    for (const auto& h : hops) {
        n += h.capacity() * sizeof(HopEntry);
        for (const auto& e : h) n += e.features.capacity() * sizeof(float);
    }
    for (const auto& f : seed_features) n += f.capacity() * sizeof(float);
    for (const auto& id : nodes) n += 2 * (id_footprint(id) - sizeof(ExternalId)); // nodes + map key
    // hash nodes: next pointer, cached hash, payload
    n += local_index.size() * (2 * sizeof(void*) + sizeof(ExternalId) + sizeof(std::uint32_t));
    n += local_index.bucket_count() * sizeof(void*);
    n += edge_set_.size() * (2 * sizeof(void*) + sizeof(std::uint64_t)) + edge_set_.bucket_count() * sizeof(void*);
    return n;
}

std::size_t SampledSubgraph::peak_tracked_bytes() const {
    return std::max<std::size_t>(query_peak_bytes + result_bytes, result_bytes + footprint());
}

SampledSubgraph decode(const std::vector<ExternalId>& seeds, const std::vector<std::string>& columns,
                       const std::vector<query::Row>& rows) {
    if (columns.size() != 5) {
        throw DecodeError("expected 5 columns (src, hop-1 id, hop-1 features, hop-2 id, hop-2 features), got " +
                          std::to_string(columns.size()));
    }
    SampledSubgraph g;
    g.hops.resize(2);
    for (const auto& s : seeds) g.add_seed(s);
    const auto n_seeds = static_cast<std::uint32_t>(g.seed_ids.size());
    for (const auto& row : rows) {
        if (row.size() != 5) throw DecodeError("row has " + std::to_string(row.size()) + " values, expected 5");
        const auto src = require_id(row[0], "src_id");
        auto it = g.local_index.find(src);
        if (it == g.local_index.end() || it->second >= n_seeds) {
            throw DecodeError("src_id " + to_string(src) + " is not a seed");
        }
        if (row[1].is_null()) {
            if (!row[3].is_null()) throw DecodeError("hop-2 node without a hop-1 node");
            continue;
        }
        const auto h1 =
            g.add_hop(0, it->second, require_id(row[1], "hop-1 id"), optional_features(row[2], "hop-1 features"));
        if (row[3].is_null()) continue;
        g.add_hop(1, h1, require_id(row[3], "hop-2 id"), optional_features(row[4], "hop-2 features"));
    }
    return g;
}

SampledSubgraph sample_two_hop(GraphStore& store, const std::vector<ExternalId>& seeds, std::int64_t max_neighbours,
                               const SamplingConfig& cfg) {
    if (max_neighbours < 0) throw SamplerError("max_neighbours must be non-negative");
    auto lookup = seed_subgraph(store, seeds, cfg, 2);
    auto params = template_params(cfg);
    params["SEED_NODES"] = id_list(lookup.seed_ids);
    params["MAX_NEIGHBOURS"] = Value(max_neighbours);
    const auto res = query::run_query(store, kTwoHopQuery, params, {cfg.seed});
    auto g = decode(lookup.seed_ids, res.columns, res.rows);
    g.seed_features = std::move(lookup.seed_features);
    g.seed_labels = std::move(lookup.seed_labels);
    g.query_peak_bytes = lookup.query_peak_bytes;
    g.result_bytes = lookup.result_bytes;
    g.db_hits = lookup.db_hits;
    account(g, res);
    return g;
}

std::vector<ExternalId> sample_one_hop(GraphStore& store, const std::vector<ExternalId>& seeds,
                                       std::int64_t max_neighbours, const SamplingConfig& cfg) {
    if (max_neighbours < 0) throw SamplerError("max_neighbours must be non-negative");
    auto params = template_params(cfg);
    params["SEED_NODES"] = id_list(seeds);
    params["MAX_NEIGHBOURS"] = Value(max_neighbours);
    const auto res = query::run_query(store, kOneHopQuery, params, {cfg.seed});
    std::vector<ExternalId> out;
    out.reserve(res.rows.size());
    for (const auto& row : res.rows) out.push_back(require_id(row[0], "neighbour id"));
    return out;
}

SampledSubgraph sample_k_hop_chained(GraphStore& store, const std::vector<ExternalId>& seeds,
                                     const std::vector<std::size_t>& fanouts, const SamplingConfig& cfg) {
    if (fanouts.size() > 8) throw SamplerError("at most 8 hops are supported");
    auto g = seed_subgraph(store, seeds, cfg, fanouts.size());
    std::vector<ExternalId> frontier = g.seed_ids;
    for (std::size_t k = 0; k < fanouts.size() && !frontier.empty(); ++k) {
        auto params = template_params(cfg);
        params["SEED_NODES"] = id_list(frontier);
        params["MAX_NEIGHBOURS"] = Value(static_cast<std::int64_t>(frontier.size() * fanouts[k]));
        const auto res = query::run_query(store, kChainedHopQuery, params, {derive_seed(cfg.seed, {k})});
        account(g, res);
        std::vector<ExternalId> next;
        std::unordered_set<ExternalId, ExternalIdHash> in_next;
        for (const auto& row : res.rows) {
            const auto src = require_id(row[0], "source id");
            const auto dst = require_id(row[1], "neighbour id");
            g.add_hop(k, g.local_index.at(src), dst, optional_features(row[2], "neighbour features"));
            if (in_next.insert(dst).second) next.push_back(dst);
        }
        frontier = std::move(next);
    }
    return g;
}

SampledSubgraph sample(GraphStore& store, const std::vector<ExternalId>& seeds, const SamplingConfig& cfg) {
    validate(cfg);
    if (cfg.strategy == Strategy::PerHopChained) return sample_k_hop_chained(store, seeds, cfg.fanouts, cfg);
    const auto per_seed = std::accumulate(cfg.fanouts.begin(), cfg.fanouts.end(), std::size_t{1}, std::multiplies<>());
    return sample_two_hop(store, seeds, static_cast<std::int64_t>(seeds.size() * per_seed), cfg);
}

} // namespace gtdb::sampler
