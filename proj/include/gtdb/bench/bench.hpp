#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gtdb/dist/distributed.hpp"
#include "gtdb/gnn/train.hpp"

namespace gtdb::bench {

/// One measured row. Times are seconds.
struct BenchResult {
    std::string scenario;
    std::size_t cache_size = 0; // page-cache bytes
    std::size_t batch_size = 0;
    std::size_t workers = 1;
    double avg_batch_time = 0;
    double epoch_time = 0;
    double sampled_nodes = 0; // per batch
    double sampled_edges = 0; // per batch
    std::size_t peak_tracked_bytes = 0;
};

void write_csv(std::ostream& os, const std::vector<BenchResult>& rows);

struct ModelShape {
    std::size_t hidden = 16;
    std::size_t layers = 2;
};

struct MemorySweepConfig {
    std::vector<std::size_t> cache_sizes{std::size_t{4} << 20, std::size_t{256} << 20};
    std::vector<std::size_t> batch_sizes{512};
    gnn::TrainConfig train;
    ModelShape model;
    /// Seeds come from the first `seed_pool` ids of the node type; 0 uses all.
    std::size_t seed_pool = 0;
};

/// Opens the store read-only once per cache size (cold cache each time) and
/// trains one epoch per batch size from the same initial model.
std::vector<BenchResult> bench_memory_sweep(const std::filesystem::path& store_dir, const MemorySweepConfig& cfg);

struct WorkerSweepConfig {
    std::vector<std::size_t> workers{1, 2, 4};
    gnn::TrainConfig train; // batch_size per worker
    ModelShape model;
    dist::Transport transport = dist::Transport::InProcess;
};

/// One distributed epoch per worker count over the same ids, so total work
/// is fixed; a row's sampled counts are the mean over workers.
std::vector<BenchResult> bench_worker_sweep(GraphStore& store, const std::vector<ExternalId>& train_ids,
                                            const WorkerSweepConfig& cfg);

struct SampleCount {
    ExternalId node;
    std::uint64_t times_sampled = 0;
    /// (seed, hop-1, hop-2) paths through the node as hop 1 or hop 2.
    std::uint64_t path_count = 0;
};

/// Runs the two-hop template `runs` times (run r seeded derive_seed(cfg.seed, {r}))
/// and counts, per non-seed node, the runs that returned it. Every node with
/// a path is listed, sampled or not; rows are ordered by descending path
/// count, then id.
std::vector<SampleCount> bench_sample_distribution(GraphStore& store, const std::vector<ExternalId>& seeds,
                                                   std::size_t runs, std::int64_t max_neighbours,
                                                   const sampler::SamplingConfig& cfg);

void write_distribution_csv(std::ostream& os, const std::vector<SampleCount>& rows);

/// Spearman correlation with average ranks for ties.
double rank_correlation(const std::vector<double>& a, const std::vector<double>& b);

} // namespace gtdb::bench
