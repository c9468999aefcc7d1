#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gtdb/gnn/sage.hpp"

namespace gtdb::gnn {

struct TrainConfig {
    std::size_t batch_size = 512;
    double learning_rate = 0.1;
    /// Fanouts, strategy and schema; its seed is replaced per batch.
    sampler::SamplingConfig sampling;
    std::uint64_t seed = 0;
    /// Stop an epoch after this many batches; 0 runs the whole epoch.
    std::size_t max_batches = 0;
};

struct BatchMetrics {
    std::size_t epoch = 0;
    std::size_t batch = 0;
    double batch_time_ms = 0;
    std::size_t seeds = 0;
    std::size_t sampled_nodes = 0;
    std::size_t sampled_edges = 0;
    double loss = 0;
    std::size_t peak_tracked_bytes = 0;
    std::uint64_t db_hits = 0;
};

struct EpochReport {
    std::vector<BatchMetrics> batches;
    double avg_batch_time = 0; // seconds
    double sampled_nodes = 0;  // per batch
    double sampled_edges = 0;  // per batch
    double loss = 0;           // mean over batches
    std::size_t peak_tracked_bytes = 0;

    /// Averages recomputed from `batches`.
    void summarize();
};

/// Sampling, forward and backward for one batch of seeds; the model is not
/// changed. Gradients are of the batch's mean loss.
struct BatchResult {
    Gradients grads;
    BatchMetrics metrics;
};
BatchResult compute_batch(GraphStore& store, const SageModel& model, const std::vector<ExternalId>& seeds,
                          const sampler::SamplingConfig& sampling);

/// Where a batch's subgraph comes from: the local store or a sampling server.
using SampleFn =
    std::function<sampler::SampledSubgraph(const std::vector<ExternalId>& seeds, const sampler::SamplingConfig&)>;
BatchResult compute_batch(const SampleFn& sample, const SageModel& model, const std::vector<ExternalId>& seeds,
                          const sampler::SamplingConfig& sampling);

/// PRNG seed of batch `batch` in epoch `epoch`.
std::uint64_t batch_seed(std::uint64_t seed, std::size_t epoch, std::size_t batch);

/// Shuffles `ids` with a seed derived from (seed, epoch) and cuts batches.
std::vector<std::vector<ExternalId>> epoch_batches(const std::vector<ExternalId>& ids, std::size_t batch_size,
                                                   std::uint64_t seed, std::size_t epoch);

/// One pass of sample, forward, backward and SGD step per batch.
EpochReport train_epoch(GraphStore& store, SageModel& model, const std::vector<ExternalId>& train_ids,
                        const TrainConfig& cfg, std::size_t epoch = 0);

/// Argmax accuracy over `ids`, sampled through the same pipeline.
double evaluate(GraphStore& store, const SageModel& model, const std::vector<ExternalId>& ids,
                const TrainConfig& cfg);

/// Every `id` of nodes labelled `node_type`, in storage order.
std::vector<ExternalId> node_ids(GraphStore& store, const std::string& node_type);

/// Deterministic shuffle-split; the second part holds round(test_fraction * n) ids.
std::pair<std::vector<ExternalId>, std::vector<ExternalId>> split_ids(std::vector<ExternalId> ids,
                                                                      double test_fraction, std::uint64_t seed);

} // namespace gtdb::gnn
