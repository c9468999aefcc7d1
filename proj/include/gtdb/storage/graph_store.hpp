#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gtdb/storage/page_cache.hpp"
#include "gtdb/storage/records.hpp"
#include "gtdb/storage/value.hpp"

namespace gtdb {

enum class Direction : std::uint8_t { Out, In, Both };

struct StoreOptions {
    std::size_t page_cache_bytes = std::size_t{64} << 20;
    bool read_only = false;
};

/// Exact counts maintained incrementally by the writer; feeds the planner's
/// cardinality model.
struct StoreStats {
    std::uint64_t node_count = 0;
    std::uint64_t edge_count = 0;
    std::map<std::string, std::uint64_t> label_counts;
    std::map<std::string, std::uint64_t> rel_type_counts;
    // (label of source node, rel type) -> edges; likewise for targets
    std::map<std::pair<std::string, std::string>, std::uint64_t> out_edges;
    std::map<std::pair<std::string, std::string>, std::uint64_t> in_edges;

    std::uint64_t label_count(std::string_view label) const;
    /// Average out-degree over nodes carrying `label` along `rel_type`
    /// edges; an empty rel_type sums over all types.
    double avg_out_degree(std::string_view label, std::string_view rel_type) const;
    double avg_in_degree(std::string_view label, std::string_view rel_type) const;

    friend bool operator==(const StoreStats&, const StoreStats&) = default;
};

/// Interned names (labels, relationship types, property keys).
class Catalog {
public:
    std::optional<std::uint32_t> find(std::string_view name) const;
    std::uint32_t intern(std::string_view name);
    const std::string& name(std::uint32_t id) const { return names_.at(id); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    std::size_t size() const noexcept { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::uint32_t> ids_;
};

struct EdgeView {
    EdgeId id = kNil;
    NodeId src = kNil;
    NodeId dst = kNil;
    std::uint32_t type = 0;
    NodeId neighbour = kNil; // the far end, as seen from the expanded node
};

class ReadTxn;

/// Disk-backed labelled property graph. One writer at a time; writes are
/// rejected while any read transaction is open. Reads go through the page
/// cache and are safe from any number of threads, each on its own ReadTxn.
class GraphStore {
public:
    /// Opens (or, in write mode, creates) the store in `dir`.
    static std::unique_ptr<GraphStore> open(const std::filesystem::path& dir, StoreOptions opts = {});
    ~GraphStore();

    GraphStore(const GraphStore&) = delete;
    GraphStore& operator=(const GraphStore&) = delete;

    NodeId create_node(std::span<const std::string> labels, const PropertyMap& props);
    NodeId create_node(std::initializer_list<std::string> labels, const PropertyMap& props) {
        std::vector<std::string> l(labels);
        return create_node(std::span<const std::string>(l), props);
    }
    EdgeId create_edge(NodeId src, NodeId dst, std::string_view rel_type, const PropertyMap& props = {});

    /// Persists buffered writes, index files and meta.json.
    void flush();

    ReadTxn begin_read();

    StoreStats stats() const;
    std::uint64_t node_count() const noexcept { return node_count_; }
    std::uint64_t edge_count() const noexcept { return edge_count_; }

    const Catalog& labels() const noexcept { return labels_; }
    const Catalog& rel_types() const noexcept { return rel_types_; }
    const Catalog& property_keys() const noexcept { return keys_; }

    bool has_index(std::string_view label, std::string_view key) const;

    /// Store-wide totals of every closed read transaction.
    AccessCounters totals() const;
    void reset_totals();

    bool read_only() const noexcept { return opts_.read_only; }
    const std::filesystem::path& dir() const noexcept { return dir_; }
    std::size_t page_cache_bytes() const noexcept { return cache_.capacity_pages() * PageCache::kPageSize; }
    std::size_t open_readers() const noexcept { return readers_.load(); }

    static constexpr std::string_view kIdKey = "id";

private:
    friend class ReadTxn;
    friend class ExpandCursor;
    struct IndexState {
        std::uint32_t label = 0;
        std::uint32_t key = 0;
        std::string file;
        int fd = -1;
        std::uint64_t capacity = 0; // on-disk capacity
        std::unordered_map<ExternalId, NodeId, ExternalIdHash> entries; // write mode only
    };
    struct Fd {
        int fd = -1;
        ~Fd();
    };

    GraphStore(std::filesystem::path dir, StoreOptions opts);
    void load_meta();
    void write_meta() const;
    void require_writable();
    std::string encode_props(const PropertyMap& props);
    void append(Fd& f, std::string& buf, std::uint64_t& size, const void* data, std::size_t n,
                std::uint64_t& offset_out);
    void flush_locked();
    void write_index(IndexState& idx);
    void load_index_entries(IndexState& idx);
    IndexState* find_index(std::uint32_t label, std::uint32_t key);
    void end_read(const AccessCounters& c) noexcept;

    // raw reads through the page cache; no DbHit accounting
    NodeRecord read_node(NodeId id, AccessCounters& c);
    EdgeRecord read_edge(EdgeId id, AccessCounters& c);
    void read_props(std::uint64_t off, std::uint32_t len, std::string& out, AccessCounters& c);

    std::filesystem::path dir_;
    StoreOptions opts_;
    PageCache cache_;
    Fd nodes_fd_, edges_fd_, props_fd_;

    Catalog labels_, rel_types_, keys_;
    std::uint64_t node_count_ = 0;
    std::uint64_t edge_count_ = 0;
    std::uint64_t props_size_ = 0;
    std::map<std::uint32_t, std::uint64_t> label_counts_;
    std::map<std::uint32_t, std::uint64_t> type_counts_;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> out_edges_, in_edges_;
    std::vector<std::unique_ptr<IndexState>> indexes_;

    // write-mode state
    std::vector<NodeRecord> node_mirror_;
    std::string edge_buf_, props_buf_;
    std::uint64_t edges_flushed_ = 0, props_flushed_ = 0;
    bool dirty_ = false;

    mutable std::mutex write_mu_;
    std::atomic<std::size_t> readers_{0};
    std::atomic<std::uint64_t> total_hits_{0}, total_cache_hits_{0}, total_cache_misses_{0};
};

/// Lazy traversal of one node's incident edges.
class ExpandCursor {
public:
    bool next(EdgeView& out);

private:
    friend class ReadTxn;
    ExpandCursor(ReadTxn* txn, NodeId node, const NodeRecord& rec, Direction dir,
                 std::optional<std::uint32_t> type, bool type_missing);

    ReadTxn* txn_;
    NodeId node_;
    std::uint64_t next_in_ = kNil;
    std::uint64_t cur_ = kNil;
    bool outgoing_phase_;
    Direction dir_;
    std::optional<std::uint32_t> type_;
    bool exhausted_;
};

/// A read transaction. Owns its AccessCounters; every public read charges
/// DbHits by the store's accounting rule:
///   node record access 1, property read 1, traversed edge 1, index match 2.
class ReadTxn {
public:
    ReadTxn(ReadTxn&& o) noexcept;
    ReadTxn& operator=(ReadTxn&&) = delete;
    ~ReadTxn();

    const AccessCounters& counters() const noexcept { return counters_; }
    GraphStore& store() const noexcept { return *store_; }
    std::uint64_t node_count() const noexcept { return store_->node_count_; }

    /// Record access (1 hit). Throws UnknownNode.
    NodeRecord node(NodeId id);
    std::vector<std::string> node_labels(NodeId id);
    bool has_label(NodeId id, std::string_view label);
    bool has_label(NodeId id, std::uint32_t label_id);

    /// Property read (1 hit). Absent keys yield nullopt.
    std::optional<PropertyValue> get_property(NodeId id, std::string_view key);
    std::vector<std::string> property_keys(NodeId id);

    EdgeView edge(EdgeId id);
    std::optional<PropertyValue> get_edge_property(EdgeId id, std::string_view key);
    std::vector<std::string> edge_property_keys(EdgeId id);

    /// Ids of `label` nodes whose `key` equals one of `values`, in value order,
    /// without duplicates. 2 hits per match. Throws IndexNotFound.
    std::vector<NodeId> node_index_seek(std::string_view label, std::string_view key,
                                        std::span<const PropertyValue> values);

    /// 1 hit for the node record now, 1 per traversed edge as the cursor advances.
    ExpandCursor expand(NodeId from, Direction dir, std::optional<std::string_view> rel_type = std::nullopt);

    void charge(std::uint64_t hits) noexcept { counters_.db_hits += hits; }

private:
    friend class GraphStore;
    friend class ExpandCursor;
    explicit ReadTxn(GraphStore* store) : store_(store) {}

    NodeRecord checked_node(NodeId id);
    std::optional<PropertyValue> find_prop(std::uint64_t off, std::uint32_t len, std::uint32_t key);
    std::vector<std::string> prop_keys(std::uint64_t off, std::uint32_t len);

    GraphStore* store_;
    AccessCounters counters_;
    std::string scratch_;
};

} // namespace gtdb
