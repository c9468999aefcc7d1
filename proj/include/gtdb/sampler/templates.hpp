#pragma once

#include <string_view>

namespace gtdb::sampler {

/// Per-label node types and the union of their property keys.
inline constexpr std::string_view kNodeMetadataQuery =
    "MATCH (n) WITH DISTINCT labels(n) AS NodeTypes, n "
    "UNWIND NodeTypes AS NodeType "
    "WITH NodeType, collect(distinct keys(n)) AS AllKeys "
    "RETURN NodeType, reduce(s = [], k IN AllKeys | s + k) AS Attributes";

/// Per (type, source label, target label) edge keys and counts.
inline constexpr std::string_view kEdgeMetadataQuery =
    "MATCH (a)-[r]->(b) "
    "WITH DISTINCT type(r) AS EdgeType, labels(a)[0] AS SourceType, labels(b)[0] AS TargetType, r "
    "WITH EdgeType, SourceType, TargetType, collect(distinct keys(r)) AS AllKeys, count(r) AS edge_count "
    "RETURN EdgeType, SourceType, TargetType, reduce(s = [], k IN AllKeys | s + k) AS UniqueKeys, edge_count";

/// Two-hop neighbourhoods of the seeds, limited globally to MAX_NEIGHBOURS
/// (seed, hop-1, hop-2) paths, features included.
inline constexpr std::string_view kTwoHopQuery =
    "MATCH (node_0:$NODE_TYPE) WHERE node_0.id IN $SEED_NODES "
    "OPTIONAL MATCH (node_0)-[rel_1:$REL_TYPE]->(node_1:$NODE_TYPE)-[rel_2:$REL_TYPE]->(node_2:$NODE_TYPE) "
    "WITH node_0, node_1, node_2 ORDER BY rand() LIMIT $MAX_NEIGHBOURS "
    "RETURN node_0.id as src_id, node_1.id, node_1.features, node_2.id, node_2.features;";

/// One-hop neighbour ids of the seeds, limited globally.
inline constexpr std::string_view kOneHopQuery =
    "MATCH (node_src:$NODE_TYPE)-[rel:$REL_TYPE]-> (node_dst:$NODE_TYPE) "
    "WHERE id(node_src) IN $SEED_NODES "
    "RETURN id(node_dst), rand() as r ORDER BY r LIMIT $MAX_NEIGHBOURS";

/// One hop of the chained strategy: the one-hop query extended with the
/// source id and the neighbour's features so a layer needs no second round trip.
inline constexpr std::string_view kChainedHopQuery =
    "MATCH (node_src:$NODE_TYPE)-[rel:$REL_TYPE]->(node_dst:$NODE_TYPE) "
    "WHERE id(node_src) IN $SEED_NODES "
    "RETURN id(node_src), id(node_dst), node_dst.features, rand() AS r ORDER BY r LIMIT $MAX_NEIGHBOURS";

/// Features and class label of the seeds themselves.
inline constexpr std::string_view kSeedLookupQuery =
    "MATCH (n:$NODE_TYPE) WHERE n.id IN $SEED_NODES RETURN n.id, n.features, n.label";

/// Feature vector of one node of a label; gives the label's feature dimension.
inline constexpr std::string_view kFeatureSampleQuery = "MATCH (n:$NODE_TYPE) RETURN n.features AS features LIMIT 1";

/// Number of distinct class labels.
inline constexpr std::string_view kClassCountQuery = "MATCH (n) RETURN count(DISTINCT n.label) AS num_classes";

/// Ids of every node of a label.
inline constexpr std::string_view kNodeIdsQuery = "MATCH (n:$NODE_TYPE) RETURN n.id AS id";

/// Every paper cited by at least one paper.
inline constexpr std::string_view kCitedPapersQuery = "MATCH (n:PAPER)-[:CITES]->(m:PAPER) RETURN DISTINCT m";

} // namespace gtdb::sampler
