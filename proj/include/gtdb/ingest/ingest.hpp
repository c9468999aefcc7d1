#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gtdb/common/error.hpp"
#include "gtdb/storage/graph_store.hpp"

namespace gtdb::ingest {

enum class IngestErrc : std::uint8_t { MalformedRow, DuplicateId, UnknownEndpoint, BadSpec };

const char* to_string(IngestErrc code);

class IngestError : public Error {
public:
    IngestError(IngestErrc code, std::string file, std::size_t line, const std::string& msg);

    IngestErrc code() const noexcept { return code_; }
    const std::string& file() const noexcept { return file_; }
    /// 1-based; 0 when the error is not tied to a row.
    std::size_t line() const noexcept { return line_; }

private:
    IngestErrc code_;
    std::string file_;
    std::size_t line_;
};

struct NodeFile {
    std::filesystem::path path;
    std::string label;
};

struct EdgeFile {
    std::filesystem::path path;
    std::string rel_type;
    std::string src_column = "src";
    std::string dst_column = "dst";
    /// Restrict endpoint lookup to one node label; otherwise an id must be
    /// unique across all loaded labels.
    std::optional<std::string> src_label;
    std::optional<std::string> dst_label;
};

/// CSV input. Every file has a header row. Node files need the id column;
/// a `features` column holds `feature_dim` semicolon-separated floats and a
/// `label` column the integer class. Other columns load as integers, floats
/// or strings, whichever parses first.
struct IngestSpec {
    std::vector<NodeFile> node_files;
    std::vector<EdgeFile> edge_files;
    std::size_t feature_dim = 0;
    std::string id_column = "id";
};

struct LoadCounts {
    std::uint64_t nodes_loaded = 0;
    std::uint64_t edges_loaded = 0;
    friend bool operator==(const LoadCounts&, const LoadCounts&) = default;
};

LoadCounts load_csv(const IngestSpec& spec, GraphStore& store);

/// Stochastic block model. Nodes are laid out community by community; node
/// `i` gets id `i`, LPG label `node_label` and class `community % classes`.
/// Features are the class centroid plus Gaussian noise.
struct SbmSpec {
    std::uint64_t communities = 4;
    std::uint64_t nodes_per_community = 250;
    double p_in = 0.05;
    double p_out = 0.002;
    std::size_t feature_dim = 16;
    double feature_noise = 1.0;
    /// Spread of the class centroids (per coordinate standard deviation).
    double centroid_scale = 1.0;
    /// 0 means one class per community.
    std::uint64_t classes = 0;
    std::uint64_t seed = 0;
    std::string node_label = "PAPER";
    std::string rel_type = "CITES";

    std::uint64_t num_classes() const { return classes == 0 ? communities : classes; }
    std::uint64_t node_count() const { return communities * nodes_per_community; }
    /// Expected number of directed edges.
    double expected_edges() const;
};

/// Throws IngestError(BadSpec) unless 0 <= p_out <= p_in <= 1 and sizes are positive.
void validate(const SbmSpec& spec);

LoadCounts generate_sbm(const SbmSpec& spec, GraphStore& store);

} // namespace gtdb::ingest
