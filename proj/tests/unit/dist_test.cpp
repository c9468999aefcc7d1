#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <sys/socket.h>

#include <future>
#include <set>
#include <thread>

#include "gtdb/common/rng.hpp"
#include "gtdb/dist/distributed.hpp"
#include "gtdb/ingest/ingest.hpp"
#include "test_support.hpp"

using namespace gtdb;
using namespace gtdb::dist;
using fixtures::TempDir;
using gnn::Gradients;
using gnn::Matrix;

namespace {

Gradients random_grads(Rng& rng, double scale = 1.0) {
    Gradients g;
    for (int k = 0; k < 2; ++k) {
        Matrix m(3, 4);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * (2 * uniform01(rng) - 1);
        g.layers.push_back(m);
    }
    g.classifier = Matrix(2, 3);
    for (Eigen::Index i = 0; i < g.classifier.size(); ++i) g.classifier.data()[i] = scale * standard_normal(rng);
    return g;
}

std::vector<const Matrix*> params(const Gradients& g) {
    std::vector<const Matrix*> out;
    for (const auto& m : g.layers) out.push_back(&m);
    out.push_back(&g.classifier);
    return out;
}

ExternalId id(const query::Value& v) { return *sampler::to_external_id(v); }

} // namespace

TEST(Allreduce, IdenticalInputsGiveTheInput) {
    Rng rng = make_rng(1);
    const auto g = random_grads(rng);
    for (std::size_t n = 1; n <= 9; ++n) {
        EXPECT_EQ(allreduce_average(std::vector<Gradients>(n, g)), g) << n;
    }
}

TEST(Allreduce, OppositeGradientsCancel) {
    Rng rng = make_rng(2);
    const auto g = random_grads(rng);
    auto neg = g;
    neg *= -1.0;
    const auto avg = allreduce_average({g, neg});
    for (const auto* m : params(avg)) EXPECT_EQ(m->cwiseAbs().maxCoeff(), 0.0);
}

TEST(Allreduce, MatchesExtendedPrecisionMean) {
    Rng rng = make_rng(3);
    for (int t = 0; t < 20; ++t) {
        std::vector<Gradients> gs;
        const auto n = 1 + uniform_below(rng, 9);
        for (std::size_t w = 0; w < n; ++w) gs.push_back(random_grads(rng, std::pow(10.0, uniform_below(rng, 6))));
        const auto avg = allreduce_average(gs);
        const auto out = params(avg);
        for (std::size_t p = 0; p < out.size(); ++p) {
            for (Eigen::Index i = 0; i < out[p]->size(); ++i) {
                long double sum = 0, mag = 0;
                for (const auto& g : gs) {
                    sum += params(g)[p]->data()[i];
                    mag += std::abs(params(g)[p]->data()[i]);
                }
                const long double ref = sum / static_cast<long double>(n);
                EXPECT_NEAR(out[p]->data()[i], static_cast<double>(ref), static_cast<double>(mag) * 1e-15);
            }
        }
    }
}

TEST(Allreduce, Errors) {
    Rng rng = make_rng(4);
    EXPECT_THROW(allreduce_average(std::vector<Gradients>{}), DistError);
    auto a = random_grads(rng), b = random_grads(rng);
    b.classifier.resize(3, 3);
    EXPECT_THROW(allreduce_average({a, b}), DistError);
    b = a;
    b.layers.pop_back();
    EXPECT_THROW(allreduce_average({a, b}), DistError);
}

TEST(Partition, DisjointCoveringAndRoundRobin) {
    std::vector<ExternalId> ids;
    for (std::int64_t i = 0; i < 103; ++i) ids.emplace_back(i);
    for (std::size_t W : {1, 2, 3, 4, 7}) {
        const auto parts = partition(ids, W, 10, 5, 1);
        const auto chunks = gnn::epoch_batches(ids, 10, 5, 1);
        std::multiset<ExternalId> seen;
        for (std::size_t w = 0; w < W; ++w) {
            for (std::size_t b = 0; b < parts[w].size(); ++b) {
                EXPECT_EQ(parts[w][b].chunk, b * W + w);
                EXPECT_EQ(parts[w][b].seeds, chunks[parts[w][b].chunk]);
                seen.insert(parts[w][b].seeds.begin(), parts[w][b].seeds.end());
            }
        }
        EXPECT_EQ(seen, std::multiset<ExternalId>(ids.begin(), ids.end()));
    }
    EXPECT_THROW(partition(ids, 0, 10, 5, 1), DistError);
}

class Cluster : public ::testing::Test {
protected:
    void SetUp() override {
        ingest::SbmSpec spec;
        spec.communities = 4;
        spec.nodes_per_community = 60;
        spec.p_in = 0.1;
        spec.p_out = 0.01;
        spec.feature_dim = 6;
        spec.seed = 9;
        store = GraphStore::open(dir.path());
        ingest::generate_sbm(spec, *store);
        ids = gnn::node_ids(*store, "PAPER");
        model = gnn::init_model(sampler::fetch_metadata(*store), 8, 2, 4);
        cfg.train.batch_size = 16;
        cfg.train.sampling.fanouts = {4, 4};
        cfg.train.seed = 21;
    }

    TempDir dir;
    std::unique_ptr<GraphStore> store;
    std::vector<ExternalId> ids;
    gnn::SageModel model;
    ClusterConfig cfg;
};

TEST_F(Cluster, OneWorkerIsSingleMachineTraining) {
    for (auto strategy : {sampler::Strategy::GlobalLimit, sampler::Strategy::PerHopChained}) {
        cfg.train.sampling.strategy = strategy;
        auto single = model;
        const auto rep = gnn::train_epoch(*store, single, ids, cfg.train, 3);
        const auto dist = run_distributed(*store, model, ids, cfg, 3);
        EXPECT_EQ(dist.model, single);
        ASSERT_EQ(dist.workers.size(), 1u);
        EXPECT_EQ(dist.workers[0].batches, rep.batches.size());
        EXPECT_DOUBLE_EQ(dist.workers[0].sampled_nodes, rep.sampled_nodes);
        EXPECT_DOUBLE_EQ(dist.workers[0].final_loss, rep.batches.back().loss);
        EXPECT_GT(dist.workers[0].epoch_time, 0.0);
    }
}

TEST_F(Cluster, ReplicasStayBitIdentical) {
    cfg.num_workers = 4;
    std::size_t syncs = 0;
    const auto res = run_distributed(*store, model, ids, cfg, 0, [&](std::size_t step, const auto& replicas) {
        EXPECT_EQ(step, syncs);
        ++syncs;
        ASSERT_EQ(replicas.size(), 4u);
        for (const auto& r : replicas) EXPECT_EQ(r, replicas[0]);
    });
    // 240 ids in chunks of 16 = 15 chunks over 4 workers
    EXPECT_EQ(syncs, 4u);
    EXPECT_FALSE(res.model == model);
    std::size_t batches = 0;
    for (const auto& w : res.workers) {
        batches += w.batches;
        EXPECT_GT(w.epoch_time, 0.0);
        EXPECT_GE(w.sampled_nodes, 0.0);
    }
    EXPECT_EQ(batches, 15u);
}

TEST_F(Cluster, SplitBatchesMatchOneLargeBatch) {
    // exhaustive fanouts make samples independent of the PRNG assignment; the
    // chained strategy also keeps hop-1 nodes that have no successor
    cfg.train.sampling.strategy = sampler::Strategy::PerHopChained;
    cfg.train.sampling.fanouts = {1000, 1000};
    cfg.train.batch_size = 32;
    cfg.train.max_batches = 3;
    const auto one = run_distributed(*store, model, ids, cfg, 0);
    auto two_cfg = cfg;
    two_cfg.num_workers = 2;
    two_cfg.train.batch_size = 16;
    const auto two = run_distributed(*store, model, ids, two_cfg, 0);
    // epoch_batches shuffles once, so chunks 2b and 2b+1 of size 16 are batch b of size 32
    for (std::size_t k = 0; k < model.layers.size(); ++k) {
        EXPECT_LT((one.model.layers[k] - two.model.layers[k]).cwiseAbs().maxCoeff(), 1e-12);
    }
    EXPECT_LT((one.model.classifier - two.model.classifier).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(Cluster, WorkerFailureAbortsTheEpoch) {
    store->create_node({"PAPER"}, {{"id", std::string("unlabelled")}, {"features", FloatVector(6, 0.f)}});
    store->flush();
    cfg.num_workers = 3;
    auto with_bad = ids;
    with_bad.emplace_back(std::string("unlabelled"));
    try {
        run_distributed(*store, model, with_bad, cfg);
        FAIL() << "expected DistError";
    } catch (const DistError& e) {
        EXPECT_NE(std::string(e.what()).find("worker"), std::string::npos) << e.what();
    }
}

TEST_F(Cluster, SocketTransportMatchesInProcess) {
    cfg.num_workers = 2;
    cfg.train.max_batches = 3;
    const auto local = run_distributed(*store, model, ids, cfg);
    cfg.transport = Transport::Socket;
    const auto remote = run_distributed(*store, model, ids, cfg);
    EXPECT_EQ(remote.model, local.model);
    cfg.train.sampling.strategy = sampler::Strategy::PerHopChained;
    EXPECT_THROW(run_distributed(*store, model, ids, cfg), DistError);
}

TEST_F(Cluster, RemoteSampleEqualsLocalSample) {
    SamplingServer server(*store, Endpoint::parse("127.0.0.1:0"));
    SamplingClient client(server.endpoint());
    std::vector<ExternalId> seeds(ids.begin(), ids.begin() + 20);
    seeds.emplace_back(std::string("missing"));
    sampler::SamplingConfig sc;
    sc.fanouts = {3, 3};
    sc.seed = 77;
    const auto a = client.sample(seeds, sc);
    const auto b = sampler::sample(*store, seeds, sc);
    EXPECT_EQ(a.seed_ids, b.seed_ids);
    EXPECT_EQ(a.nodes, b.nodes);
    EXPECT_EQ(a.hops, b.hops);
    EXPECT_EQ(a.edge_pairs, b.edge_pairs);
    EXPECT_EQ(a.seed_features, b.seed_features);
    EXPECT_EQ(a.seed_labels, b.seed_labels);
}

TEST(Wire, MessagesRoundTrip) {
    SampleRequest r;
    r.template_id = "one_hop";
    r.seeds = {std::int64_t{4}, std::string("p1")};
    r.max = 9;
    r.seed = 18446744073709551615ull;
    EXPECT_EQ(decode_request(encode_request(r)), r);
    SampleResponse resp;
    resp.rows = {{query::Value("p0"), query::Value(), query::Value(FloatVector{0.1f, -2.5f, 1e-7f})},
                 {query::Value(std::int64_t{3}), query::Value(1.5), query::Value(true)}};
    const auto back = decode_response(encode_response(resp));
    ASSERT_TRUE(back.ok);
    EXPECT_EQ(back.rows, resp.rows);
    EXPECT_THROW(decode_request("[1]"), DistError);
    EXPECT_THROW(decode_request(R"({"template": "two_hop"})"), DistError);
    EXPECT_THROW(decode_request(R"({"template": "two_hop", "seeds": [1.5]})"), DistError);
}

TEST(Wire, EndpointParsing) {
    EXPECT_EQ(Endpoint::parse("localhost:8080").port, 8080);
    EXPECT_EQ(Endpoint::parse(":9").host, "127.0.0.1");
    EXPECT_THROW(Endpoint::parse("nohost"), DistError);
    EXPECT_THROW(Endpoint::parse("h:70000"), DistError);
    EXPECT_THROW(Endpoint::parse("h:x"), DistError);
}

class Server : public ::testing::Test {
protected:
    void SetUp() override {
        store = fixtures::tiny_tree(dir.path());
        server = std::make_unique<SamplingServer>(*store, Endpoint{});
        auto txn = store->begin_read();
        for (NodeId u = 0; u < store->node_count(); ++u) {
            auto c = txn.expand(u, Direction::Out);
            EdgeView e;
            while (c.next(e)) edges.insert({fixtures::pid(static_cast<int>(u)), fixtures::pid(static_cast<int>(e.dst))});
        }
    }

    SampleRequest two_hop(std::uint64_t seed) const {
        SampleRequest r;
        r.seeds = {std::string("p0"), std::string("p1"), std::string("p2")};
        r.max = 5;
        r.seed = seed;
        return r;
    }

    TempDir dir;
    std::unique_ptr<GraphStore> store;
    std::unique_ptr<SamplingServer> server;
    std::set<std::pair<ExternalId, ExternalId>> edges;
};

TEST_F(Server, UnknownTemplateAndMalformedBodiesKeepTheConnection) {
    SamplingClient c(server->endpoint());
    auto r = two_hop(1);
    r.template_id = "three_hop";
    const auto bad = c.request(r);
    EXPECT_FALSE(bad.ok);
    EXPECT_EQ(bad.code, 2);
    const auto garbage = decode_response(c.exchange("{not json"));
    EXPECT_FALSE(garbage.ok);
    EXPECT_EQ(garbage.code, 1);
    r.template_id = "two_hop";
    r.max = -1;
    EXPECT_EQ(c.request(r).code, 1);
    EXPECT_TRUE(c.request(two_hop(1)).ok);
}

TEST_F(Server, ReplayIsByteIdentical) {
    SamplingClient c(server->endpoint());
    const auto body = encode_request(two_hop(42));
    const auto first = c.exchange(body);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(c.exchange(body), first);
    SamplingClient other(server->endpoint());
    EXPECT_EQ(other.exchange(body), first);
}

TEST_F(Server, ConcurrentRequestsStayInTheClosure) {
    constexpr int kClients = 4, kRequests = 25;
    std::vector<std::future<std::vector<SampleResponse>>> futs;
    for (int t = 0; t < kClients; ++t) {
        futs.push_back(std::async(std::launch::async, [&, t] {
            SamplingClient c(server->endpoint());
            std::vector<SampleResponse> out;
            for (int i = 0; i < kRequests; ++i) out.push_back(c.request(two_hop(static_cast<std::uint64_t>(t * 1000 + i))));
            return out;
        }));
    }
    std::set<std::string> distinct;
    for (auto& f : futs) {
        for (const auto& resp : f.get()) {
            ASSERT_TRUE(resp.ok) << resp.msg;
            ASSERT_EQ(resp.rows.size(), 5u);
            std::string key;
            for (const auto& row : resp.rows) {
                ASSERT_EQ(row.size(), 5u);
                EXPECT_TRUE(edges.count({id(row[0]), id(row[1])}));
                EXPECT_TRUE(edges.count({id(row[1]), id(row[3])}));
                key += row[3].to_string() + ",";
            }
            distinct.insert(key);
        }
    }
    EXPECT_EQ(server->requests_served(), static_cast<std::uint64_t>(kClients * kRequests));
    EXPECT_GT(distinct.size(), 10u);
}

TEST_F(Server, OneHopAndSeedLookup) {
    SamplingClient c(server->endpoint());
    auto r = two_hop(3);
    r.template_id = "one_hop";
    r.seeds = {std::string("p0")};
    r.max = 10;
    const auto one = c.request(r);
    ASSERT_TRUE(one.ok) << one.msg;
    ASSERT_EQ(one.rows.size(), 2u);
    for (const auto& row : one.rows) ASSERT_EQ(row.size(), 1u);
    r.template_id = "seed_lookup";
    r.seeds = {std::string("p2"), std::string("nope")};
    const auto lookup = c.request(r);
    ASSERT_EQ(lookup.rows.size(), 1u);
    EXPECT_EQ(lookup.rows[0][0], query::Value("p2"));
    EXPECT_EQ(lookup.rows[0][2], query::Value(std::int64_t{0}));
}

TEST_F(Server, OversizedFrameGetsAnErrorAndClose) {
    SamplingClient probe(server->endpoint()); // the server survives the bad client
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(server->endpoint().port);
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    ASSERT_EQ(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
    const std::uint32_t huge = htonl(kMaxFrame + 1);
    ASSERT_EQ(::send(fd, &huge, 4, 0), 4);
    const auto reply = read_frame(fd);
    ASSERT_TRUE(reply);
    EXPECT_EQ(decode_response(*reply).code, 1);
    EXPECT_FALSE(read_frame(fd));
    ::close(fd);
    EXPECT_TRUE(probe.request(two_hop(1)).ok);
}

TEST(ReaderScalability, ThroughputDoesNotDropWithMoreReaders) {
    if (std::thread::hardware_concurrency() < 4) GTEST_SKIP() << "needs at least 4 cores";
    TempDir dir;
    ingest::SbmSpec spec;
    spec.communities = 8;
    spec.nodes_per_community = 250;
    spec.p_in = 0.03;
    spec.p_out = 0.001;
    spec.feature_dim = 16;
    auto store = GraphStore::open(dir.path());
    ingest::generate_sbm(spec, *store);
    const auto ids = gnn::node_ids(*store, "PAPER");
    auto rate = [&](int readers) {
        const auto t0 = std::chrono::steady_clock::now();
        std::atomic<std::size_t> rows{0};
        std::vector<std::thread> ts;
        for (int r = 0; r < readers; ++r) {
            ts.emplace_back([&, r] {
                sampler::SamplingConfig sc;
                for (int i = 0; i < 40; ++i) {
                    sc.seed = static_cast<std::uint64_t>(r * 100 + i);
                    std::vector<ExternalId> seeds(ids.begin() + i * 10, ids.begin() + i * 10 + 10);
                    rows += sampler::sample(*store, seeds, sc).hop_entries();
                }
            });
        }
        for (auto& t : ts) t.join();
        return static_cast<double>(rows) / std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    const double r1 = rate(1), r2 = rate(2), r4 = rate(4);
    EXPECT_GE(r2, 0.95 * r1);
    EXPECT_GE(r4, 0.95 * r2);
}
