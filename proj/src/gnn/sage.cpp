#include "gtdb/gnn/sage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "gtdb/common/rng.hpp"

namespace gtdb::gnn {

namespace {

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

bool same_shape(const Matrix& a, const Matrix& b) { return a.rows() == b.rows() && a.cols() == b.cols(); }

// Exact comparison; Eigen's operator== would be elementwise.
bool identical(const Matrix& a, const Matrix& b) {
    return same_shape(a, b) && std::equal(a.data(), a.data() + a.size(), b.data());
}

Activation layer_activation(const SageModel& m, std::size_t k) {
    return k + 1 == m.layers.size() ? Activation::Identity : m.activation;
}

void check_congruent(const SageModel& m, const Gradients& g) {
    bool ok = g.layers.size() == m.layers.size() && same_shape(g.classifier, m.classifier);
    for (std::size_t k = 0; ok && k < g.layers.size(); ++k) ok = same_shape(g.layers[k], m.layers[k]);
    if (!ok) throw ShapeError("gradients are not shaped like the model");
}

nlohmann::json to_json(const Matrix& m) {
    std::vector<double> data(m.data(), m.data() + m.size());
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix from_json(const nlohmann::json& j) {
    Matrix m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != static_cast<std::size_t>(m.size())) throw GnnError("model file: matrix data size mismatch");
    std::copy(data.begin(), data.end(), m.data());
    return m;
}

} // namespace

std::size_t SageModel::parameter_count() const {
    std::size_t n = static_cast<std::size_t>(classifier.size());
    for (const auto& w : layers) n += static_cast<std::size_t>(w.size());
    return n;
}

std::size_t SageModel::footprint() const { return parameter_count() * sizeof(double) + sizeof(*this); }

bool operator==(const SageModel& a, const SageModel& b) {
    if (a.activation != b.activation || a.layers.size() != b.layers.size()) return false;
    for (std::size_t k = 0; k < a.layers.size(); ++k) {
        if (!identical(a.layers[k], b.layers[k])) return false;
    }
    return identical(a.classifier, b.classifier);
}

Gradients Gradients::zeros_like(const SageModel& m) {
    Gradients g;
    for (const auto& w : m.layers) g.layers.push_back(Matrix::Zero(w.rows(), w.cols()));
    g.classifier = Matrix::Zero(m.classifier.rows(), m.classifier.cols());
    return g;
}

bool Gradients::all_finite() const {
    for (const auto& w : layers) {
        if (!w.allFinite()) return false;
    }
    return classifier.allFinite();
}

Gradients& Gradients::operator*=(double s) {
    for (auto& w : layers) w *= s;
    classifier *= s;
    return *this;
}

Gradients& Gradients::operator+=(const Gradients& o) {
    if (o.layers.size() != layers.size() || !same_shape(o.classifier, classifier)) {
        throw ShapeError("adding gradients of different shapes");
    }
    for (std::size_t k = 0; k < layers.size(); ++k) {
        if (!same_shape(layers[k], o.layers[k])) throw ShapeError("adding gradients of different shapes");
        layers[k] += o.layers[k];
    }
    classifier += o.classifier;
    return *this;
}

bool operator==(const Gradients& a, const Gradients& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t k = 0; k < a.layers.size(); ++k) {
        if (!identical(a.layers[k], b.layers[k])) return false;
    }
    return identical(a.classifier, b.classifier);
}

SageModel init_model(const sampler::GraphMetadata& meta, std::size_t hidden_dim, std::size_t num_layers,
                     std::uint64_t seed, std::string_view node_type) {
    if (num_layers == 0) throw InitError("num_layers must be at least 1");
    if (hidden_dim == 0) throw InitError("hidden_dim must be positive");
    if (meta.num_classes == 0) throw InitError("metadata reports no classes");
    std::size_t dim = 0;
    for (const auto& t : meta.node_types) {
        if (node_type.empty() ? t.feature_dim > 0 : t.label == node_type) {
            dim = t.feature_dim;
            break;
        }
    }
    if (dim == 0) {
        throw InitError(node_type.empty() ? "no node type has features"
                                          : "node type " + std::string(node_type) + " has no feature_dim");
    }
    Rng rng = make_rng(seed);
    auto glorot = [&](std::size_t rows, std::size_t cols) {
        const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
        Matrix m(rows, cols);
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = a * (2.0 * uniform01(rng) - 1.0);
        }
        return m;
    };
    SageModel m;
    std::size_t in = dim;
    for (std::size_t k = 0; k < num_layers; ++k) {
        m.layers.push_back(glorot(hidden_dim, 2 * in));
        in = hidden_dim;
    }
    m.classifier = glorot(meta.num_classes, hidden_dim);
    return m;
}

Batch make_batch(sampler::SampledSubgraph subgraph) {
    Batch b;
    b.target_ids = subgraph.seed_ids;
    b.labels = subgraph.seed_labels;
    for (std::size_t i = 0; i < b.labels.size(); ++i) {
        if (b.labels[i] < 0) throw GnnError("seed " + to_string(b.target_ids[i]) + " has no class label");
    }
    b.subgraph = std::move(subgraph);
    return b;
}

Matrix forward(const SageModel& model, const Batch& batch, ForwardCache* cache) {
    return forward(model, batch.subgraph, cache);
}

Matrix forward(const SageModel& model, const sampler::SampledSubgraph& g, ForwardCache* cache) {
    const std::size_t K = model.layers.size();
    if (K == 0) throw ShapeError("model has no layers");
    const std::size_t n_nodes = g.node_count();
    const std::size_t n_seeds = g.seed_ids.size();

    std::vector<std::vector<std::uint32_t>> children(n_nodes);
    for (auto [p, c] : g.edge_pairs) children.at(p).push_back(c);
    for (auto& c : children) std::sort(c.begin(), c.end());

    // sets[k]: nodes whose layer-k state is needed; each is a prefix of sets[k-1]
    std::vector<std::vector<std::uint32_t>> sets(K + 1);
    std::vector<std::vector<std::int64_t>> pos(K + 1, std::vector<std::int64_t>(n_nodes, -1));
    for (std::uint32_t i = 0; i < n_seeds; ++i) sets[K].push_back(i);
    for (std::size_t k = K; k > 0; --k) {
        sets[k - 1] = sets[k];
        for (std::size_t i = 0; i < sets[k].size(); ++i) pos[k - 1][sets[k][i]] = static_cast<std::int64_t>(i);
        std::vector<std::uint32_t> extra;
        for (auto v : sets[k]) {
            for (auto c : children[v]) {
                if (pos[k - 1][c] < 0) extra.push_back(c);
            }
        }
        std::sort(extra.begin(), extra.end());
        extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
        for (auto c : extra) {
            pos[k - 1][c] = static_cast<std::int64_t>(sets[k - 1].size());
            sets[k - 1].push_back(c);
        }
    }

    const auto d = static_cast<Eigen::Index>(model.input_dim());
    Matrix h(static_cast<Eigen::Index>(sets[0].size()), d);
    for (std::size_t r = 0; r < sets[0].size(); ++r) {
        const auto& f = g.features(sets[0][r]);
        if (static_cast<Eigen::Index>(f.size()) != d) {
            throw ShapeError("node " + to_string(g.nodes[sets[0][r]]) + " has " + std::to_string(f.size()) +
                             " features, model expects " + std::to_string(d));
        }
        for (Eigen::Index c = 0; c < d; ++c) h(static_cast<Eigen::Index>(r), c) = f[static_cast<std::size_t>(c)];
    }

    if (cache) cache->layers.assign(K, {});
    for (std::size_t k = 1; k <= K; ++k) {
        const Matrix& w = model.layers[k - 1];
        const Eigen::Index d_in = h.cols();
        if (w.cols() != 2 * d_in) throw ShapeError("layer " + std::to_string(k) + " is " + shape(w));
        const auto n = static_cast<Eigen::Index>(sets[k].size());
        Matrix z(n, 2 * d_in);
        z.leftCols(d_in) = h.topRows(n);
        std::vector<std::vector<std::uint32_t>> nbr(sets[k].size());
        Eigen::RowVectorXd sum(d_in);
        for (Eigen::Index i = 0; i < n; ++i) {
            auto& rows = nbr[static_cast<std::size_t>(i)];
            for (auto c : children[sets[k][static_cast<std::size_t>(i)]]) {
                rows.push_back(static_cast<std::uint32_t>(pos[k - 1][c]));
            }
            sum.setZero();
            for (auto r : rows) sum += h.row(r);
            if (!rows.empty()) sum /= static_cast<double>(rows.size());
            z.block(i, d_in, 1, d_in) = sum;
        }
        Matrix a = z * w.transpose();
        h = layer_activation(model, k - 1) == Activation::Relu ? Matrix(a.cwiseMax(0.0)) : a;
        if (cache) {
            auto& L = cache->layers[k - 1];
            L.rows = sets[k - 1].size();
            L.nbr = std::move(nbr);
            L.z = std::move(z);
            L.a = std::move(a);
        }
    }
    if (model.classifier.cols() != h.cols()) throw ShapeError("classifier is " + shape(model.classifier));
    if (cache) cache->h_last = h;
    return h * model.classifier.transpose();
}

double loss(const Matrix& logits, const std::vector<std::int64_t>& labels) {
    if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
        throw ShapeError(std::to_string(labels.size()) + " labels for " + std::to_string(logits.rows()) + " rows");
    }
    if (labels.empty()) return 0.0;
    double total = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const auto y = labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= logits.cols()) throw ShapeError("label " + std::to_string(y) + " out of range");
        Eigen::Index top = 0;
        const double m = logits.row(i).maxCoeff(&top);
        // log1p keeps precision when the top logit dominates
        double rest = 0.0;
        for (Eigen::Index c = 0; c < logits.cols(); ++c) {
            if (c != top) rest += std::exp(logits(i, c) - m);
        }
        total += (m - logits(i, y)) + std::log1p(rest);
    }
    return total / static_cast<double>(labels.size());
}

Gradients backward(const SageModel& model, const ForwardCache& cache, const Matrix& logits,
                   const std::vector<std::int64_t>& labels, double scale) {
    const std::size_t K = model.layers.size();
    if (cache.layers.size() != K) throw ShapeError("forward cache does not match the model");
    loss(logits, labels); // label checks
    Gradients grads;
    grads.layers.resize(K);
    if (labels.empty()) return Gradients::zeros_like(model);

    // d loss / d logits = (softmax - onehot) / batch
    Matrix g(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp().matrix();
        g.row(i) = e / e.sum();
        g(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
    }
    g *= scale / static_cast<double>(labels.size());

    grads.classifier = g.transpose() * cache.h_last;
    Matrix dh = g * model.classifier;
    for (std::size_t k = K; k >= 1; --k) {
        const auto& L = cache.layers[k - 1];
        Matrix da = dh;
        if (layer_activation(model, k - 1) == Activation::Relu) da = da.cwiseProduct((L.a.array() > 0.0).cast<double>().matrix());
        grads.layers[k - 1] = da.transpose() * L.z;
        if (k == 1) break;
        const Matrix dz = da * model.layers[k - 1];
        const Eigen::Index d_in = dz.cols() / 2;
        Matrix prev = Matrix::Zero(static_cast<Eigen::Index>(L.rows), d_in);
        prev.topRows(dz.rows()) += dz.leftCols(d_in);
        for (Eigen::Index i = 0; i < dz.rows(); ++i) {
            const auto& nb = L.nbr[static_cast<std::size_t>(i)];
            if (nb.empty()) continue;
            const Eigen::RowVectorXd share = dz.block(i, d_in, 1, d_in) / static_cast<double>(nb.size());
            for (auto r : nb) prev.row(r) += share;
        }
        dh = std::move(prev);
    }
    return grads;
}

void step(SageModel& model, const Gradients& grads, double lr) {
    check_congruent(model, grads);
    if (!grads.all_finite()) throw StepError("non-finite gradient");
    for (std::size_t k = 0; k < model.layers.size(); ++k) model.layers[k] -= lr * grads.layers[k];
    model.classifier -= lr * grads.classifier;
}

std::size_t argmax_row(const Matrix& logits, Eigen::Index row) {
    Eigen::Index best = 0;
    logits.row(row).maxCoeff(&best);
    return static_cast<std::size_t>(best);
}

void save_model(const SageModel& m, const std::filesystem::path& p) {
    nlohmann::json j;
    j["activation"] = m.activation == Activation::Relu ? "relu" : "identity";
    j["layers"] = nlohmann::json::array();
    for (const auto& w : m.layers) j["layers"].push_back(to_json(w));
    j["classifier"] = to_json(m.classifier);
    std::ofstream out(p);
    if (!out) throw GnnError("cannot write " + p.string());
    out << j.dump();
}

SageModel load_model(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw GnnError("cannot read " + p.string());
    try {
        const auto j = nlohmann::json::parse(in);
        SageModel m;
        m.activation = j.at("activation") == "relu" ? Activation::Relu : Activation::Identity;
        for (const auto& w : j.at("layers")) m.layers.push_back(from_json(w));
        m.classifier = from_json(j.at("classifier"));
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw GnnError("malformed model file " + p.string() + ": " + e.what());
    }
}

} // namespace gtdb::gnn
