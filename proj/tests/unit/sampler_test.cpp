#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "gtdb/common/rng.hpp"
#include "gtdb/ingest/ingest.hpp"
#include "gtdb/query/executor.hpp"
#include "gtdb/sampler/sampler.hpp"
#include "gtdb/sampler/templates.hpp"
#include "test_support.hpp"

using namespace gtdb;
using namespace gtdb::sampler;
using fixtures::pid;
using fixtures::TempDir;
using query::Value;

namespace {

std::vector<ExternalId> ext(std::initializer_list<int> ids) {
    std::vector<ExternalId> out;
    for (int i : ids) out.emplace_back(pid(i));
    return out;
}

// Raw-storage view of the graph: external id per node and out-adjacency.
struct Oracle {
    std::vector<ExternalId> id;
    std::map<ExternalId, NodeId> node;
    std::vector<std::vector<NodeId>> out;

    explicit Oracle(GraphStore& s) {
        auto txn = s.begin_read();
        for (NodeId n = 0; n < s.node_count(); ++n) {
            id.push_back(*to_external_id(*txn.get_property(n, "id")));
            node[id.back()] = n;
            out.emplace_back();
            auto c = txn.expand(n, Direction::Out);
            EdgeView e;
            while (c.next(e)) out.back().push_back(e.dst);
        }
    }

    bool has_edge(const ExternalId& a, const ExternalId& b) const {
        const auto& o = out[node.at(a)];
        return std::find(o.begin(), o.end(), node.at(b)) != o.end();
    }

    std::set<ExternalId> closure(const std::vector<ExternalId>& seeds, int hops) const {
        std::set<NodeId> frontier, all;
        for (const auto& s : seeds) {
            if (node.count(s)) frontier.insert(node.at(s));
        }
        all = frontier;
        for (int h = 0; h < hops; ++h) {
            std::set<NodeId> next;
            for (auto u : frontier) next.insert(out[u].begin(), out[u].end());
            all.insert(next.begin(), next.end());
            frontier = next;
        }
        std::set<ExternalId> r;
        for (auto n : all) r.insert(id[n]);
        return r;
    }

    // Number of (seed, hop-1, hop-2) paths each node lies on as hop-1 or hop-2.
    std::map<ExternalId, std::uint64_t> path_counts(const std::vector<ExternalId>& seeds) const {
        std::map<ExternalId, std::uint64_t> c;
        for (const auto& s : seeds) {
            for (auto h1 : out[node.at(s)]) {
                for (auto h2 : out[h1]) {
                    ++c[id[h1]];
                    ++c[id[h2]];
                }
            }
        }
        return c;
    }
};

std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = (static_cast<double>(i + j) / 2.0) + 1.0;
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

// Every hop edge is a store edge and every node lies in the seeds' closure.
void expect_contained(const SampledSubgraph& g, const Oracle& o, const std::vector<ExternalId>& seeds) {
    const auto closure = o.closure(seeds, static_cast<int>(g.hops.size()));
    for (const auto& n : g.nodes) EXPECT_TRUE(closure.count(n)) << to_string(n);
    for (const auto& hop : g.hops) {
        for (const auto& e : hop) EXPECT_TRUE(o.has_edge(g.nodes[e.parent], g.nodes[e.local]));
    }
}

void expect_closed_world(const SampledSubgraph& g, std::size_t dim) {
    for (std::uint32_t i = 0; i < g.nodes.size(); ++i) EXPECT_EQ(g.features(i).size(), dim) << to_string(g.nodes[i]);
    for (const auto& hop : g.hops) {
        for (const auto& e : hop) EXPECT_EQ(e.features.size(), dim);
    }
}

SamplingConfig cfg_with_seed(std::uint64_t seed, Strategy s = Strategy::GlobalLimit) {
    SamplingConfig c;
    c.seed = seed;
    c.strategy = s;
    return c;
}

// Reference per-hop sampler: enumerate candidate edges in index-seek then
// adjacency order, draw one uniform per candidate, keep the smallest
// |frontier| * fanout draws.
SampledSubgraph reference_chained(GraphStore& s, const Oracle& o, const std::vector<ExternalId>& seeds,
                                  const std::vector<std::size_t>& fanouts, std::uint64_t seed) {
    SampledSubgraph g;
    g.hops.resize(fanouts.size());
    std::vector<ExternalId> frontier;
    for (const auto& id : seeds) {
        if (o.node.count(id) && !g.local_index.count(id)) {
            g.add_seed(id);
            frontier.push_back(id);
        }
    }
    auto txn = s.begin_read();
    for (std::size_t k = 0; k < fanouts.size(); ++k) {
        Rng rng = make_rng(derive_seed(seed, {k}));
        struct Cand {
            double r;
            std::size_t seq;
            ExternalId src, dst;
        };
        std::vector<Cand> cands;
        for (const auto& f : frontier) {
            auto c = txn.expand(o.node.at(f), Direction::Out, "CITES");
            EdgeView e;
            while (c.next(e)) cands.push_back({uniform01(rng), cands.size(), f, o.id[e.dst]});
        }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            return a.r != b.r ? a.r < b.r : a.seq < b.seq;
        });
        cands.resize(std::min(cands.size(), frontier.size() * fanouts[k]));
        std::vector<ExternalId> next;
        for (const auto& c : cands) {
            const auto f = txn.get_property(o.node.at(c.dst), "features")->as_vector();
            g.add_hop(k, g.local_index.at(c.src), c.dst, f);
            if (std::find(next.begin(), next.end(), c.dst) == next.end()) next.push_back(c.dst);
        }
        frontier = next;
    }
    return g;
}

} // namespace

TEST(Metadata, CitationFixture) {
    TempDir d;
    auto s = fixtures::tiny_tree(d.path());
    const auto md = fetch_metadata(*s);
    ASSERT_EQ(md.node_types.size(), 1u);
    EXPECT_EQ(md.node_types[0], (NodeType{"PAPER", {"features", "id", "label"}, 2, 21}));
    ASSERT_EQ(md.edge_types.size(), 1u);
    EXPECT_EQ(md.edge_types[0], (EdgeType{"CITES", "PAPER", "PAPER", {}, 18}));
    EXPECT_EQ(md.num_classes, 1u);
}

TEST(Metadata, EmptyStore) {
    TempDir d;
    auto s = GraphStore::open(d.path());
    const auto md = fetch_metadata(*s);
    EXPECT_TRUE(md.node_types.empty());
    EXPECT_TRUE(md.edge_types.empty());
    EXPECT_EQ(md.num_classes, 0u);
}

TEST(Metadata, NodeKeysMatchFullScan) {
    TempDir d;
    auto s = GraphStore::open(d.path());
    Rng rng = make_rng(9);
    const std::vector<std::string> pool{"a", "b", "c", "d", "e"};
    for (int i = 0; i < 60; ++i) {
        PropertyMap p{{"id", std::int64_t{i}}};
        for (const auto& k : pool) {
            if (uniform_below(rng, 3) == 0) p[k] = std::int64_t{1};
        }
        std::vector<std::string> labels{i % 3 ? "PAPER" : "AUTHOR"};
        if (i % 7 == 0) labels.push_back("VENUE");
        s->create_node(std::span<const std::string>(labels), p);
    }
    s->flush();
    std::map<std::string, std::set<std::string>> expect;
    std::map<std::string, std::uint64_t> counts;
    {
        auto txn = s->begin_read();
        for (NodeId n = 0; n < s->node_count(); ++n) {
            for (const auto& l : txn.node_labels(n)) {
                const auto keys = txn.property_keys(n);
                expect[l].insert(keys.begin(), keys.end());
                ++counts[l];
            }
        }
    }
    const auto md = fetch_node_metadata(*s);
    ASSERT_EQ(md.node_types.size(), expect.size());
    for (const auto& t : md.node_types) {
        const auto& e = expect.at(t.label);
        EXPECT_EQ(t.keys, std::vector<std::string>(e.begin(), e.end())) << t.label;
        EXPECT_EQ(t.count, counts.at(t.label));
        EXPECT_EQ(t.feature_dim, 0u);
    }
}

TEST(Metadata, DisjointKeySets) {
    TempDir d;
    auto s = GraphStore::open(d.path());
    for (int i = 0; i < 3; ++i) s->create_node({"AUTHOR"}, {{"name", "x"}, {"orcid", std::int64_t{i}}});
    for (int i = 0; i < 4; ++i) s->create_node({"PAPER"}, fixtures::paper(i, i % 2, 5));
    s->flush();
    const auto md = fetch_node_metadata(*s);
    ASSERT_EQ(md.node_types.size(), 2u);
    EXPECT_EQ(md.node_types[0], (NodeType{"AUTHOR", {"name", "orcid"}, 0, 3}));
    EXPECT_EQ(md.node_types[1], (NodeType{"PAPER", {"features", "id", "label"}, 5, 4}));
    EXPECT_EQ(md.num_classes, 2u);
}

TEST(Metadata, EdgeTypes) {
    TempDir d;
    {
        auto s = GraphStore::open(d / "cites");
        for (int i = 0; i < 5; ++i) s->create_node({"PAPER"}, fixtures::paper(i));
        for (auto [u, v] : std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {1, 4}}) {
            s->create_edge(static_cast<NodeId>(u), static_cast<NodeId>(v), "CITES");
        }
        s->flush();
        const auto md = fetch_edge_metadata(*s);
        ASSERT_EQ(md.edge_types.size(), 1u);
        EXPECT_EQ(md.edge_types[0], (EdgeType{"CITES", "PAPER", "PAPER", {}, 7}));
    }
    {
        auto s = GraphStore::open(d / "nodes-only");
        s->create_node({"PAPER"}, fixtures::paper(0));
        s->flush();
        EXPECT_TRUE(fetch_edge_metadata(*s).edge_types.empty());
    }
    {
        auto s = GraphStore::open(d / "hetero");
        const auto a = s->create_node({"AUTHOR"}, {{"id", "a"}});
        const auto p = s->create_node({"PAPER"}, fixtures::paper(0));
        const auto q = s->create_node({"PAPER"}, fixtures::paper(1));
        s->create_edge(a, p, "WRITES", {{"position", std::int64_t{1}}});
        s->create_edge(a, q, "WRITES");
        s->create_edge(p, q, "CITES");
        s->flush();
        const auto md = fetch_edge_metadata(*s);
        ASSERT_EQ(md.edge_types.size(), 2u);
        EXPECT_EQ(md.edge_types[0], (EdgeType{"CITES", "PAPER", "PAPER", {}, 1}));
        EXPECT_EQ(md.edge_types[1], (EdgeType{"WRITES", "AUTHOR", "PAPER", {"position"}, 2}));
    }
}

TEST(Metadata, FootprintDoesNotGrowWithTheGraph) {
    std::vector<std::size_t> bytes;
    for (std::uint64_t per : {250, 5000}) {
        TempDir d;
        ingest::SbmSpec spec;
        spec.nodes_per_community = per;
        spec.p_in = 4.0 / static_cast<double>(per);
        spec.p_out = 0;
        auto s = GraphStore::open(d.path());
        ingest::generate_sbm(spec, *s);
        const auto md = fetch_metadata(*s);
        EXPECT_EQ(md.node_types.at(0).count, 4 * per);
        bytes.push_back(md.footprint());
    }
    EXPECT_EQ(bytes[0], bytes[1]);
    EXPECT_LT(bytes[0], 1024u);
}

TEST(Decode, SharedHopOneNodeGetsOneIndex) {
    const std::vector<ExternalId> seeds{std::int64_t{1}};
    const std::vector<std::string> cols{"src_id", "node_1.id", "node_1.features", "node_2.id", "node_2.features"};
    const std::vector<query::Row> rows{{Value(1), Value(2), Value(FloatVector{2}), Value(3), Value(FloatVector{3})},
                                       {Value(1), Value(2), Value(FloatVector{2}), Value(4), Value(FloatVector{4})}};
    const auto g = decode(seeds, cols, rows);
    ASSERT_EQ(g.node_count(), 4u);
    const auto a = g.local_index.at(std::int64_t{2});
    EXPECT_EQ(a, 1u);
    EXPECT_EQ(g.hop(0).size(), 2u); // one entry per row
    EXPECT_EQ(g.hop(1).size(), 2u);
    const auto incident = std::count_if(g.edge_pairs.begin(), g.edge_pairs.end(),
                                        [&](auto e) { return e.first == a; });
    EXPECT_EQ(incident, 2);
    EXPECT_EQ(g.edge_pairs.size(), 3u);
    EXPECT_EQ(g.features(a), FloatVector{2});
}

TEST(Decode, AllNullRowsGiveSeedsOnly) {
    const std::vector<ExternalId> seeds{std::string("a"), std::string("b")};
    const std::vector<std::string> cols(5, "c");
    const std::vector<query::Row> rows{{Value("a"), {}, {}, {}, {}}, {Value("b"), {}, {}, {}, {}}};
    const auto g = decode(seeds, cols, rows);
    EXPECT_EQ(g.nodes, seeds);
    EXPECT_TRUE(g.edge_pairs.empty());
}

TEST(Decode, LocalIndexIsABijectionOntoMentionedIds) {
    Rng rng = make_rng(4);
    const std::vector<std::string> cols(5, "c");
    auto random_id = [&]() -> ExternalId {
        const auto k = static_cast<std::int64_t>(uniform_below(rng, 30));
        return k % 2 ? ExternalId(k) : ExternalId("s" + std::to_string(k));
    };
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ExternalId> seeds;
        for (std::uint64_t i = 0, n = 1 + uniform_below(rng, 5); i < n; ++i) seeds.push_back(random_id());
        std::set<ExternalId> mentioned(seeds.begin(), seeds.end());
        std::vector<query::Row> rows;
        for (std::uint64_t i = 0, n = uniform_below(rng, 20); i < n; ++i) {
            query::Row r{Value::from_external_id(seeds[uniform_below(rng, seeds.size())]), {}, {}, {}, {}};
            if (uniform_below(rng, 5)) {
                const auto h1 = random_id();
                mentioned.insert(h1);
                r[1] = Value::from_external_id(h1);
                r[2] = Value(FloatVector{1, 2});
                if (uniform_below(rng, 4)) {
                    const auto h2 = random_id();
                    mentioned.insert(h2);
                    r[3] = Value::from_external_id(h2);
                    r[4] = Value(FloatVector{3, 4});
                }
            }
            rows.push_back(std::move(r));
        }
        const auto g = decode(seeds, cols, rows);
        ASSERT_EQ(g.nodes.size(), g.local_index.size());
        EXPECT_EQ(std::set<ExternalId>(g.nodes.begin(), g.nodes.end()), mentioned);
        for (std::uint32_t i = 0; i < g.nodes.size(); ++i) EXPECT_EQ(g.local_index.at(g.nodes[i]), i);
        for (std::size_t i = 0; i < g.seed_ids.size(); ++i) EXPECT_EQ(g.local_index.at(g.seed_ids[i]), i);
        for (auto i = static_cast<std::uint32_t>(g.seed_ids.size()); i < g.nodes.size(); ++i) {
            EXPECT_EQ(g.features(i).size(), 2u);
        }
        EXPECT_GE(g.hop_entries() + g.seed_ids.size(), g.local_index.size());
        std::set<std::pair<std::uint32_t, std::uint32_t>> distinct;
        for (const auto& hop : g.hops) {
            for (const auto& e : hop) distinct.emplace(e.parent, e.local);
        }
        EXPECT_EQ(g.edge_pairs.size(), distinct.size());
        EXPECT_EQ(std::set(g.edge_pairs.begin(), g.edge_pairs.end()), distinct);
    }
}

TEST(Decode, SchemaMismatches) {
    const std::vector<ExternalId> seeds{std::int64_t{1}};
    const std::vector<std::string> five(5, "c");
    auto fails = [&](const std::vector<std::string>& cols, query::Row row) {
        EXPECT_THROW(decode(seeds, cols, {std::move(row)}), DecodeError);
    };
    fails({"a", "b", "c", "d"}, {Value(1), {}, {}, {}});
    fails(five, {Value(1), {}, {}, {}});
    fails(five, {Value(2.5), {}, {}, {}, {}});
    fails(five, {Value(9), {}, {}, {}, {}});
    fails(five, {Value(1), {}, {}, Value(3), {}});
    fails(five, {Value(1), Value(2), Value("x"), {}, {}});
    fails(five, {Value(1), Value(FloatVector{1}), {}, {}, {}});
}

TEST(TwoHop, ZeroLimitGivesSeedsWithFeatures) {
    TempDir d;
    auto s = fixtures::tiny_tree(d.path());
    const auto g = sample_two_hop(*s, ext({0, 1, 2}), 0, {});
    EXPECT_EQ(g.nodes, ext({0, 1, 2}));
    EXPECT_TRUE(g.edge_pairs.empty());
    EXPECT_EQ(g.features(1), (FloatVector{1.0f, 1.25f}));
    EXPECT_EQ(g.seed_labels, (std::vector<std::int64_t>{0, 0, 0}));
}

TEST(TwoHop, SamplesStayInClosureAndCoverEveryPath) {
    TempDir d;
    auto s = fixtures::tiny_tree(d.path());
    const Oracle o(*s);
    const auto seeds = ext({0, 1, 2});
    std::set<std::pair<ExternalId, ExternalId>> seen;
    for (std::uint64_t run = 0; run < 20000; ++run) {
        const auto g = sample_two_hop(*s, seeds, 5, cfg_with_seed(run));
        if (run < 200) {
            expect_contained(g, o, seeds);
            expect_closed_world(g, 2);
            EXPECT_LE(g.node_count(), seeds.size() + 2 * 5);
        }
        ASSERT_EQ(g.hop(1).size(), 5u);
        for (const auto& e : g.hop(1)) seen.emplace(g.nodes[e.parent], g.nodes[e.local]);
        if (seen.size() == 12) break;
    }
    EXPECT_EQ(seen.size(), 12u);
}

TEST(TwoHop, UnknownSeedsAreDropped) {
    TempDir d;
    auto s = fixtures::tiny_tree(d.path());
    auto seeds = ext({1, 99});
    seeds.emplace_back(std::int64_t{1});
    seeds.push_back(seeds[0]);
    const auto g = sample_two_hop(*s, seeds, 100, {});
    EXPECT_EQ(g.seed_ids, ext({1}));
    EXPECT_EQ(g.hop(0).size(), 4u);
    EXPECT_EQ(g.hop(1).size(), 4u);
    EXPECT_EQ(g.node_count(), 7u);
    EXPECT_EQ(g.edge_pairs.size(), 6u);
    expect_closed_world(g, 2);
}

TEST(TwoHop, ReferenceScaleFixtureKeepsExactlyTheLimit) {
    TempDir d;
    auto s = fixtures::reference_profile_fixture(d.path());
    std::vector<ExternalId> seeds;
    for (int i = 0; i < 10; ++i) seeds.emplace_back(pid(i));
    const auto g = sample_two_hop(*s, seeds, 100, cfg_with_seed(3));
    EXPECT_EQ(g.hop(1).size(), 100u);
    EXPECT_LE(g.node_count(), 10u + 200u);
    expect_contained(g, Oracle(*s), seeds);

    query::Params p{{"NODE_TYPE", Value("PAPER")}, {"REL_TYPE", Value("CITES")}, {"MAX_NEIGHBOURS", Value(100)}};
    query::List l;
    for (const auto& id : seeds) l.push_back(Value::from_external_id(id));
    p["SEED_NODES"] = Value(l);
    const auto res = query::run_query(*s, kTwoHopQuery, p, {3});
    EXPECT_EQ(res.rows.size(), 100u);
    std::map<std::string, std::vector<std::uint64_t>> rows;
    for (const auto* op : res.profile.bottom_up()) rows[op->name].push_back(op->rows);
    EXPECT_EQ(rows["NodeIndexSeek"], (std::vector<std::uint64_t>{10}));
    EXPECT_EQ(rows["Expand(All)"], (std::vector<std::uint64_t>{88, 18524}));
    EXPECT_EQ(rows["Top"], (std::vector<std::uint64_t>{100}));
    for (const auto& op : res.profile.operators) {
        if (op.name == "NodeIndexSeek") EXPECT_EQ(op.db_hits, 20u);
    }
}

TEST(TwoHop, NodeBoundUnderGlobalLimit) {
    TempDir d;
    auto s = fixtures::random_graph(d.path(), 80, 0.08, 5);
    const Oracle o(*s);
    const auto seeds = ext({0, 5, 10, 15});
    for (std::int64_t max : {1, 3, 10, 40, 200}) {
        for (std::uint64_t run = 0; run < 5; ++run) {
            const auto g = sample_two_hop(*s, seeds, max, cfg_with_seed(run));
            EXPECT_LE(g.node_count(), seeds.size() + 2 * static_cast<std::size_t>(max));
            EXPECT_LE(g.hop(1).size(), static_cast<std::size_t>(max));
            expect_contained(g, o, seeds);
            expect_closed_world(g, 2);
        }
    }
}

TEST(OneHop, LimitsAndSinks) {
    TempDir d;
    auto s = fixtures::tiny_tree(d.path());
    const auto seeds = ext({3, 4, 5, 6, 7, 8}); // 12 out-neighbours p9..p20
    const auto all = ext({9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20});
    const std::set<ExternalId> truth(all.begin(), all.end());
    const auto five = sample_one_hop(*s, seeds, 5, cfg_with_seed(1));
    EXPECT_EQ(five.size(), 5u);
    for (const auto& id : five) EXPECT_TRUE(truth.count(id));
    for (std::int64_t max : {12, 40}) {
        const auto r = sample_one_hop(*s, seeds, max, cfg_with_seed(2));
        EXPECT_EQ(std::set<ExternalId>(r.begin(), r.end()), truth);
        EXPECT_EQ(r.size(), 12u);
    }
    EXPECT_TRUE(sample_one_hop(*s, ext({9, 10}), 5, {}).empty());
}

TEST(Chained, FanoutBounds) {
    TempDir d;
    auto s = fixtures::random_graph(d.path(), 200, 0.1, 8);
    const Oracle o(*s);
    const auto seeds = ext({1, 2, 3, 4, 5});
    for (std::uint64_t run = 0; run < 5; ++run) {
        const auto g = sample_k_hop_chained(*s, seeds, {12, 12}, cfg_with_seed(run, Strategy::PerHopChained));
        EXPECT_LE(g.hop(0).size(), seeds.size() * 12);
        std::set<std::uint32_t> hop1;
        for (const auto& e : g.hop(0)) hop1.insert(e.local);
        EXPECT_LE(g.hop(1).size(), hop1.size() * 12);
        EXPECT_LE(g.node_count(), seeds.size() * (1 + 12 + 144));
        expect_contained(g, o, seeds);
        expect_closed_world(g, 2);
    }
}

TEST(Chained, FanoutOneOnAPath) {
    TempDir d;
    auto s = GraphStore::open(d.path());
    for (int i = 0; i < 10; ++i) s->create_node({"PAPER"}, fixtures::paper(i));
    for (int i = 0; i + 1 < 10; ++i) s->create_edge(static_cast<NodeId>(i), static_cast<NodeId>(i + 1), "CITES");
    s->flush();
    const auto g = sample_k_hop_chained(*s, ext({0, 2, 4}), {1}, {});
    ASSERT_EQ(g.hop(0).size(), 3u);
    EXPECT_EQ(g.seed_ids, ext({0, 2, 4}));
    for (const auto& e : g.hop(0)) {
        const auto src = std::get<std::string>(g.nodes[e.parent]);
        EXPECT_EQ(g.nodes[e.local], ExternalId(pid(std::stoi(src.substr(1)) + 1)));
    }
}

TEST(Chained, MatchesReferenceSampler) {
    TempDir d;
    auto s = fixtures::random_graph(d.path(), 60, 0.07, 2);
    const Oracle o(*s);
    const auto seeds = ext({0, 7, 7, 14, 21, 99});
    for (std::uint64_t run = 0; run < 20; ++run) {
        const std::vector<std::size_t> fanouts{2, 3};
        const auto g = sample_k_hop_chained(*s, seeds, fanouts, cfg_with_seed(run, Strategy::PerHopChained));
        const auto ref = reference_chained(*s, o, seeds, fanouts, run);
        EXPECT_EQ(g.nodes, ref.nodes);
        EXPECT_EQ(g.hops, ref.hops);
    }
}

TEST(Sample, DispatchAndValidation) {
    TempDir d;
    auto s = fixtures::tiny_tree(d.path());
    SamplingConfig cfg;
    cfg.fanouts = {1, 1};
    const auto g = sample(*s, ext({0, 1}), cfg);
    EXPECT_EQ(g.hop(1).size(), 2u); // global limit |seeds| * 1 * 1
    cfg.strategy = Strategy::PerHopChained;
    cfg.fanouts = {2, 2, 1};
    const auto c = sample(*s, ext({0}), cfg);
    EXPECT_EQ(c.hops.size(), 3u);
    EXPECT_EQ(c.hop(0).size(), 2u);
    EXPECT_EQ(c.hop(1).size(), 4u);
    EXPECT_TRUE(c.hop(2).empty());
    cfg.fanouts = {};
    EXPECT_THROW(sample(*s, ext({0}), cfg), SamplerError);
    cfg.fanouts = {3, 0};
    EXPECT_THROW(sample(*s, ext({0}), cfg), SamplerError);
    cfg.strategy = Strategy::GlobalLimit;
    cfg.fanouts = {3};
    EXPECT_THROW(sample(*s, ext({0}), cfg), SamplerError);
}

TEST(TwoHop, FrequencyFollowsPathCount) {
    TempDir d;
    ingest::SbmSpec spec;
    spec.feature_dim = 4;
    spec.seed = 21;
    auto s = GraphStore::open(d.path());
    ingest::generate_sbm(spec, *s);
    const Oracle o(*s);
    std::vector<ExternalId> seeds;
    for (std::int64_t i = 0; i < 10; ++i) seeds.emplace_back(i);
    const auto paths = o.path_counts(seeds);
    const auto closure = o.closure(seeds, 2);
    std::map<ExternalId, std::uint64_t> freq;
    for (std::uint64_t run = 0; run < 100; ++run) {
        const auto g = sample_two_hop(*s, seeds, 100, cfg_with_seed(run));
        for (std::size_t i = g.seed_ids.size(); i < g.nodes.size(); ++i) ++freq[g.nodes[i]];
    }
    for (const auto& [id, n] : freq) EXPECT_TRUE(closure.count(id)) << to_string(id);
    std::vector<double> a, b;
    for (const auto& [id, n] : paths) {
        if (std::find(seeds.begin(), seeds.end(), id) != seeds.end()) continue;
        a.push_back(static_cast<double>(n));
        b.push_back(freq.count(id) ? static_cast<double>(freq[id]) : 0.0);
    }
    EXPECT_GT(spearman(a, b), 0.9);
}
