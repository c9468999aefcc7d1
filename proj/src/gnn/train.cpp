#include "gtdb/gnn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gtdb/common/rng.hpp"
#include "gtdb/query/binder.hpp"
#include "gtdb/query/executor.hpp"
#include "gtdb/query/parser.hpp"
#include "gtdb/sampler/templates.hpp"

namespace gtdb::gnn {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

} // namespace

void EpochReport::summarize() {
    avg_batch_time = sampled_nodes = sampled_edges = loss = 0;
    peak_tracked_bytes = 0;
    if (batches.empty()) return;
    for (const auto& b : batches) {
        avg_batch_time += b.batch_time_ms / 1000.0;
        sampled_nodes += static_cast<double>(b.sampled_nodes);
        sampled_edges += static_cast<double>(b.sampled_edges);
        loss += b.loss;
        peak_tracked_bytes = std::max(peak_tracked_bytes, b.peak_tracked_bytes);
    }
    const auto n = static_cast<double>(batches.size());
    avg_batch_time /= n;
    sampled_nodes /= n;
    sampled_edges /= n;
    loss /= n;
}

BatchResult compute_batch(GraphStore& store, const SageModel& model, const std::vector<ExternalId>& seeds,
                          const sampler::SamplingConfig& sampling) {
    return compute_batch([&store](const auto& s, const auto& c) { return sampler::sample(store, s, c); }, model,
                         seeds, sampling);
}

BatchResult compute_batch(const SampleFn& sample, const SageModel& model, const std::vector<ExternalId>& seeds,
                          const sampler::SamplingConfig& sampling) {
    const auto t0 = Clock::now();
    auto batch = make_batch(sample(seeds, sampling));
    ForwardCache cache;
    const Matrix logits = forward(model, batch, &cache);
    BatchResult r;
    r.metrics.loss = loss(logits, batch.labels);
    r.grads = backward(model, cache, logits, batch.labels);
    r.metrics.batch_time_ms = ms_since(t0);
    r.metrics.seeds = batch.target_ids.size();
    r.metrics.sampled_nodes = batch.subgraph.node_count();
    r.metrics.sampled_edges = batch.subgraph.edge_pairs.size();
    r.metrics.peak_tracked_bytes = batch.subgraph.peak_tracked_bytes();
    r.metrics.db_hits = batch.subgraph.db_hits;
    return r;
}

std::uint64_t batch_seed(std::uint64_t seed, std::size_t epoch, std::size_t batch) {
    return derive_seed(seed, {1, epoch, batch});
}

std::vector<std::vector<ExternalId>> epoch_batches(const std::vector<ExternalId>& ids, std::size_t batch_size,
                                                   std::uint64_t seed, std::size_t epoch) {
    if (batch_size == 0) throw GnnError("batch_size must be positive");
    auto order = ids;
    Rng rng = make_rng(derive_seed(seed, {0, epoch}));
    shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<ExternalId>> out;
    for (std::size_t i = 0; i < order.size(); i += batch_size) {
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + batch_size)));
    }
    return out;
}

EpochReport train_epoch(GraphStore& store, SageModel& model, const std::vector<ExternalId>& train_ids,
                        const TrainConfig& cfg, std::size_t epoch) {
    sampler::validate(cfg.sampling);
    EpochReport report;
    const auto batches = epoch_batches(train_ids, cfg.batch_size, cfg.seed, epoch);
    for (std::size_t b = 0; b < batches.size(); ++b) {
        if (cfg.max_batches && b == cfg.max_batches) break;
        const auto t0 = Clock::now();
        auto sampling = cfg.sampling;
        sampling.seed = batch_seed(cfg.seed, epoch, b);
        auto r = compute_batch(store, model, batches[b], sampling);
        step(model, r.grads, cfg.learning_rate);
        r.metrics.batch_time_ms = ms_since(t0);
        r.metrics.epoch = epoch;
        r.metrics.batch = b;
        report.batches.push_back(r.metrics);
    }
    report.summarize();
    return report;
}

double evaluate(GraphStore& store, const SageModel& model, const std::vector<ExternalId>& ids,
                const TrainConfig& cfg) {
    sampler::validate(cfg.sampling);
    std::size_t correct = 0, total = 0;
    for (std::size_t i = 0, b = 0; i < ids.size(); i += cfg.batch_size, ++b) {
        const std::vector<ExternalId> seeds(ids.begin() + static_cast<std::ptrdiff_t>(i),
                                            ids.begin() + static_cast<std::ptrdiff_t>(std::min(ids.size(), i + cfg.batch_size)));
        auto sampling = cfg.sampling;
        sampling.seed = derive_seed(cfg.seed, {2, b});
        const auto batch = make_batch(sampler::sample(store, seeds, sampling));
        const Matrix logits = forward(model, batch);
        for (Eigen::Index r = 0; r < logits.rows(); ++r) {
            correct += argmax_row(logits, r) == static_cast<std::size_t>(batch.labels[static_cast<std::size_t>(r)]);
        }
        total += static_cast<std::size_t>(logits.rows());
    }
    return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

std::vector<ExternalId> node_ids(GraphStore& store, const std::string& node_type) {
    const auto plan = query::plan(query::bind(query::parse(sampler::kNodeIdsQuery), {{"NODE_TYPE", node_type}}), store);
    auto txn = store.begin_read();
    query::ResultStream rs(plan, txn);
    std::vector<ExternalId> out;
    std::vector<query::Value> row;
    while (rs.next(row)) {
        if (auto id = sampler::to_external_id(row[0])) out.push_back(*id);
    }
    return out;
}

std::pair<std::vector<ExternalId>, std::vector<ExternalId>> split_ids(std::vector<ExternalId> ids,
                                                                      double test_fraction, std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) throw GnnError("test fraction must lie in [0, 1]");
    Rng rng = make_rng(derive_seed(seed, {3}));
    shuffle(ids.begin(), ids.end(), rng);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(ids.size())));
    std::vector<ExternalId> test(ids.end() - static_cast<std::ptrdiff_t>(n_test), ids.end());
    ids.resize(ids.size() - n_test);
    return {std::move(ids), std::move(test)};
}

} // namespace gtdb::gnn
