#include "gtdb/bench/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include "gtdb/common/rng.hpp"
#include "gtdb/query/binder.hpp"
#include "gtdb/query/executor.hpp"
#include "gtdb/query/parser.hpp"

namespace gtdb::bench {

namespace {

constexpr std::string_view kPathQuery =
    "MATCH (a:$NODE_TYPE)-[:$REL_TYPE]->(b:$NODE_TYPE)-[:$REL_TYPE]->(c:$NODE_TYPE) "
    "WHERE a.id IN $SEED_NODES RETURN b.id, c.id";

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

std::string csv_id(const ExternalId& id) {
    const auto s = gtdb::to_string(id);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

} // namespace

void write_csv(std::ostream& os, const std::vector<BenchResult>& rows) {
    os << "scenario,cache_size,batch_size,workers,avg_batch_time,epoch_time,sampled_nodes,sampled_edges,"
          "peak_tracked_bytes\n";
    for (const auto& r : rows) {
        os << r.scenario << ',' << r.cache_size << ',' << r.batch_size << ',' << r.workers << ',' << r.avg_batch_time
           << ',' << r.epoch_time << ',' << r.sampled_nodes << ',' << r.sampled_edges << ',' << r.peak_tracked_bytes
           << '\n';
    }
}

std::vector<BenchResult> bench_memory_sweep(const std::filesystem::path& store_dir, const MemorySweepConfig& cfg) {
    std::vector<BenchResult> out;
    for (const auto cache : cfg.cache_sizes) {
        auto store = GraphStore::open(store_dir, StoreOptions{cache, true});
        auto ids = gnn::node_ids(*store, cfg.train.sampling.node_type);
        if (cfg.seed_pool && ids.size() > cfg.seed_pool) ids.resize(cfg.seed_pool);
        const auto init = gnn::init_model(sampler::fetch_metadata(*store), cfg.model.hidden, cfg.model.layers,
                                          cfg.train.seed, cfg.train.sampling.node_type);
        for (const auto batch : cfg.batch_sizes) {
            auto train = cfg.train;
            train.batch_size = batch;
            auto model = init;
            const auto t0 = std::chrono::steady_clock::now();
            const auto rep = gnn::train_epoch(*store, model, ids, train);
            BenchResult r;
            r.scenario = "memory";
            r.cache_size = cache;
            r.batch_size = batch;
            r.avg_batch_time = rep.avg_batch_time;
            r.epoch_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            r.sampled_nodes = rep.sampled_nodes;
            r.sampled_edges = rep.sampled_edges;
            r.peak_tracked_bytes = rep.peak_tracked_bytes;
            out.push_back(r);
        }
    }
    return out;
}

std::vector<BenchResult> bench_worker_sweep(GraphStore& store, const std::vector<ExternalId>& train_ids,
                                            const WorkerSweepConfig& cfg) {
    const auto init = gnn::init_model(sampler::fetch_metadata(store), cfg.model.hidden, cfg.model.layers,
                                      cfg.train.seed, cfg.train.sampling.node_type);
    std::vector<BenchResult> out;
    for (const auto w : cfg.workers) {
        dist::ClusterConfig cc;
        cc.num_workers = w;
        cc.train = cfg.train;
        cc.transport = cfg.transport;
        const auto res = dist::run_distributed(store, init, train_ids, cc);
        BenchResult r;
        r.scenario = "workers";
        r.cache_size = store.page_cache_bytes();
        r.batch_size = cfg.train.batch_size;
        r.workers = w;
        r.epoch_time = res.epoch_time;
        std::size_t batches = 0;
        for (const auto& rep : res.workers) {
            for (const auto& m : rep.metrics) {
                r.avg_batch_time += m.batch_time_ms / 1000.0;
                r.peak_tracked_bytes = std::max(r.peak_tracked_bytes, m.peak_tracked_bytes);
            }
            batches += rep.metrics.size();
            r.sampled_nodes += rep.sampled_nodes;
            r.sampled_edges += rep.sampled_edges;
        }
        if (batches) r.avg_batch_time /= static_cast<double>(batches);
        r.sampled_nodes /= static_cast<double>(res.workers.size());
        r.sampled_edges /= static_cast<double>(res.workers.size());
        out.push_back(r);
    }
    return out;
}

std::vector<SampleCount> bench_sample_distribution(GraphStore& store, const std::vector<ExternalId>& seeds,
                                                   std::size_t runs, std::int64_t max_neighbours,
                                                   const sampler::SamplingConfig& cfg) {
    std::map<ExternalId, SampleCount> table;
    {
        query::List seed_list;
        for (const auto& s : seeds) seed_list.push_back(query::Value::from_external_id(s));
        const query::Params params{{"NODE_TYPE", query::Value(cfg.node_type)},
                                   {"REL_TYPE", query::Value(cfg.rel_type)},
                                   {"SEED_NODES", query::Value(std::move(seed_list))}};
        const auto plan = query::plan(query::bind(query::parse(kPathQuery), params), store);
        auto txn = store.begin_read();
        query::ResultStream rs(plan, txn);
        query::Row row;
        while (rs.next(row)) {
            for (const auto& v : row) {
                if (auto id = sampler::to_external_id(v)) {
                    auto& e = table[*id];
                    e.node = *id;
                    ++e.path_count;
                }
            }
        }
    }
    for (std::size_t r = 0; r < runs; ++r) {
        auto c = cfg;
        c.seed = derive_seed(cfg.seed, {r});
        const auto g = sampler::sample_two_hop(store, seeds, max_neighbours, c);
        for (std::size_t i = g.seed_ids.size(); i < g.nodes.size(); ++i) {
            auto& e = table[g.nodes[i]];
            e.node = g.nodes[i];
            ++e.times_sampled;
        }
    }
    for (const auto& s : seeds) table.erase(s);
    std::vector<SampleCount> out;
    out.reserve(table.size());
    for (auto& [id, e] : table) out.push_back(std::move(e));
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path_count > b.path_count; });
    return out;
}

void write_distribution_csv(std::ostream& os, const std::vector<SampleCount>& rows) {
    os << "node_id,times_sampled,two_hop_path_count\n";
    for (const auto& r : rows) os << csv_id(r.node) << ',' << r.times_sampled << ',' << r.path_count << '\n';
}

double rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) return 0.0;
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double cov = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    return va > 0 && vb > 0 ? cov / std::sqrt(va * vb) : 0.0;
}

} // namespace gtdb::bench
