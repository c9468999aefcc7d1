#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gtdb/common/error.hpp"
#include "gtdb/query/value.hpp"
#include "gtdb/storage/graph_store.hpp"

namespace gtdb::sampler {

struct NodeType {
    std::string label;
    std::vector<std::string> keys; // sorted, unique
    std::size_t feature_dim = 0;   // 0 when the label has no `features`
    std::uint64_t count = 0;
    friend bool operator==(const NodeType&, const NodeType&) = default;
};

struct EdgeType {
    std::string rel_type;
    std::string source;
    std::string target;
    std::vector<std::string> keys; // sorted, unique
    std::uint64_t count = 0;
    friend bool operator==(const EdgeType&, const EdgeType&) = default;
};

struct GraphMetadata {
    std::vector<NodeType> node_types; // by label
    std::vector<EdgeType> edge_types; // by (rel_type, source, target)
    std::uint64_t num_classes = 0;

    const NodeType* node_type(std::string_view label) const;
    /// Bytes this object retains.
    std::size_t footprint() const;
};

/// Node part of the metadata, plus num_classes (distinct values of the
/// integer `label` property).
GraphMetadata fetch_node_metadata(GraphStore& store);
GraphMetadata fetch_edge_metadata(GraphStore& store);
/// Both parts merged.
GraphMetadata fetch_metadata(GraphStore& store);

enum class Strategy : std::uint8_t { GlobalLimit, PerHopChained };

struct SamplingConfig {
    std::vector<std::size_t> fanouts{12, 12};
    Strategy strategy = Strategy::GlobalLimit;
    std::uint64_t seed = 0;
    std::string node_type = "PAPER";
    std::string rel_type = "CITES";
};

/// Throws SamplerError unless fanouts are non-empty and positive.
void validate(const SamplingConfig& cfg);

class SamplerError : public Error {
public:
    using Error::Error;
};

/// Row stream that does not follow the expected RETURN schema.
class DecodeError : public SamplerError {
public:
    using SamplerError::SamplerError;
};

struct HopEntry {
    std::uint32_t parent = 0; // local index of the node one hop closer to the seeds
    std::uint32_t local = 0;  // local index of the sampled neighbour
    FloatVector features;     // the neighbour's features, as returned with the row
    friend bool operator==(const HopEntry&, const HopEntry&) = default;
};

/// A sampled k-hop neighbourhood in training-ready form. Hop lists keep one
/// entry per returned row; node ids are merged into dense local indices,
/// seeds first, and edge_pairs holds each distinct sampled edge once.
struct SampledSubgraph {
    std::vector<ExternalId> seed_ids;
    std::vector<std::vector<HopEntry>> hops; // hops[k]: rows sampled at hop k+1
    std::vector<ExternalId> nodes;           // local index -> id
    std::unordered_map<ExternalId, std::uint32_t, ExternalIdHash> local_index;
    std::vector<FloatVector> seed_features;
    /// Class label per seed; -1 when the seed has none.
    std::vector<std::int64_t> seed_labels;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edge_pairs; // (parent, neighbour)

    /// Peak operator memory of the queries that produced this subgraph.
    std::uint64_t query_peak_bytes = 0;
    /// Largest materialized query result.
    std::uint64_t result_bytes = 0;
    std::uint64_t db_hits = 0;

    std::size_t node_count() const noexcept { return nodes.size(); }
    const std::vector<HopEntry>& hop(std::size_t k) const;
    std::size_t hop_entries() const;
    /// Adds a seed (no-op when already present); returns its local index.
    std::uint32_t add_seed(const ExternalId& id, FloatVector features = {}, std::int64_t label = -1);
    /// Appends a row's hop-(k+1) entry; returns the neighbour's local index.
    std::uint32_t add_hop(std::size_t k, std::uint32_t parent, const ExternalId& id, FloatVector features);
    /// Features of a node: a seed's own, otherwise those of the first hop
    /// entry naming it. Empty when none were returned.
    const FloatVector& features(std::uint32_t local) const;
    /// Bytes retained by the subgraph's buffers.
    std::size_t footprint() const;
    /// Tracked graph-data bytes at the worst point of producing this
    /// subgraph: while a query runs (operator state plus its result rows) or
    /// while the rows are decoded (rows plus subgraph).
    std::size_t peak_tracked_bytes() const;

private:
    std::uint32_t intern(const ExternalId& id);

    std::vector<std::uint64_t> feature_ref_; // per local index: (hop << 32 | entry) + 1, 0 = none
    std::unordered_set<std::uint64_t> edge_set_;
};

/// Decodes rows of the two-hop template (src_id, node_1.id, node_1.features,
/// node_2.id, node_2.features). Seeds take local indices 0..n-1 in the given
/// order; null hop entries are skipped. Seed features are left empty.
SampledSubgraph decode(const std::vector<ExternalId>& seeds, const std::vector<std::string>& columns,
                       const std::vector<query::Row>& rows);

/// Global-limit strategy: one two-hop query keeping `max_neighbours` uniformly
/// chosen (seed, hop-1, hop-2) paths. Unknown seeds are dropped.
SampledSubgraph sample_two_hop(GraphStore& store, const std::vector<ExternalId>& seeds,
                               std::int64_t max_neighbours, const SamplingConfig& cfg);

/// Up to `max_neighbours` out-neighbour ids of the seeds, one per sampled edge.
std::vector<ExternalId> sample_one_hop(GraphStore& store, const std::vector<ExternalId>& seeds,
                                       std::int64_t max_neighbours, const SamplingConfig& cfg);

/// Per-hop chained strategy: hop k keeps |frontier| * fanouts[k] edges out
/// of the current frontier; the distinct ids reached become the next frontier.
SampledSubgraph sample_k_hop_chained(GraphStore& store, const std::vector<ExternalId>& seeds,
                                     const std::vector<std::size_t>& fanouts, const SamplingConfig& cfg);

/// Dispatches on cfg.strategy. The global limit is |seeds| * product(fanouts).
SampledSubgraph sample(GraphStore& store, const std::vector<ExternalId>& seeds, const SamplingConfig& cfg);

/// Converts a query value holding an integer or string id.
std::optional<ExternalId> to_external_id(const query::Value& v);

} // namespace gtdb::sampler
