#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "gtdb/common/error.hpp"
#include "gtdb/sampler/sampler.hpp"

namespace gtdb::gnn {

using Matrix = Eigen::MatrixXd;

class GnnError : public Error {
public:
    using Error::Error;
};
class InitError : public GnnError {
public:
    using GnnError::GnnError;
};
class ShapeError : public GnnError {
public:
    using GnnError::GnnError;
};
class StepError : public GnnError {
public:
    using GnnError::GnnError;
};

enum class Activation : std::uint8_t { Relu, Identity };

/// Mean-aggregate GraphSAGE. Layer k maps CONCAT(h_v, mean of h_u over the
/// sampled neighbours u of v) through W^k (d_k x 2 d_{k-1}) and the
/// activation; a linear classifier maps the last state to class logits.
/// No bias terms.
struct SageModel {
    std::vector<Matrix> layers;
    Matrix classifier; // classes x d_K
    Activation activation = Activation::Relu;

    std::size_t input_dim() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers[0].cols() / 2); }
    std::size_t num_classes() const { return static_cast<std::size_t>(classifier.rows()); }
    std::size_t parameter_count() const;
    /// Bytes held by the parameters.
    std::size_t footprint() const;

    friend bool operator==(const SageModel& a, const SageModel& b);
};

struct Gradients {
    std::vector<Matrix> layers;
    Matrix classifier;

    static Gradients zeros_like(const SageModel& m);
    bool all_finite() const;
    Gradients& operator*=(double s);
    Gradients& operator+=(const Gradients& o);

    friend bool operator==(const Gradients& a, const Gradients& b);
};

/// Scaled uniform (Glorot) initialization from metadata alone. The input
/// dimension is the feature_dim of `node_type`, or of the first node type
/// that has features when empty.
SageModel init_model(const sampler::GraphMetadata& meta, std::size_t hidden_dim, std::size_t num_layers,
                     std::uint64_t seed, std::string_view node_type = {});

struct Batch {
    sampler::SampledSubgraph subgraph;
    std::vector<ExternalId> target_ids;
    std::vector<std::int64_t> labels;
};

/// Targets are the subgraph's seeds. Throws GnnError when a seed has no label.
Batch make_batch(sampler::SampledSubgraph subgraph);

/// Intermediates kept by forward() for backward().
struct ForwardCache {
    struct Layer {
        std::size_t rows = 0;                        // nodes computed at this layer
        std::vector<std::vector<std::uint32_t>> nbr; // per row: neighbour rows in the previous layer, ascending
        Matrix z;                                    // rows x 2 d_in: CONCAT(self, mean)
        Matrix a;                                    // pre-activation
    };
    std::vector<Layer> layers;
    Matrix h_last; // seeds x d_K
};

/// One logit row per seed. Neighbour means sum in ascending local-index order
/// and divide; an empty neighbourhood has a zero mean.
Matrix forward(const SageModel& model, const sampler::SampledSubgraph& g, ForwardCache* cache = nullptr);
Matrix forward(const SageModel& model, const Batch& batch, ForwardCache* cache = nullptr);

/// Mean cross-entropy. Throws ShapeError on a label outside [0, classes).
double loss(const Matrix& logits, const std::vector<std::int64_t>& labels);

/// Exact gradients of loss(logits, labels) scaled by `scale`.
Gradients backward(const SageModel& model, const ForwardCache& cache, const Matrix& logits,
                   const std::vector<std::int64_t>& labels, double scale = 1.0);

/// W <- W - lr * grad. Throws StepError on non-finite gradients and
/// ShapeError on mismatched shapes; the model is untouched on error.
void step(SageModel& model, const Gradients& grads, double lr);

std::size_t argmax_row(const Matrix& logits, Eigen::Index row);

void save_model(const SageModel& m, const std::filesystem::path& p);
SageModel load_model(const std::filesystem::path& p);

} // namespace gtdb::gnn
