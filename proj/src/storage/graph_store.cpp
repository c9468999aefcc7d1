#include "gtdb/storage/graph_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace gtdb {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::uint32_t kNodesFile = 0;
constexpr std::uint32_t kEdgesFile = 1;
constexpr std::uint32_t kPropsFile = 2;
constexpr std::uint32_t kFirstIndexFile = 3;
constexpr std::size_t kWriteBufferLimit = std::size_t{8} << 20;
constexpr int kFormatVersion = 1;

[[noreturn]] void io_fail(const std::string& what) {
    throw StoreError(StoreErrc::Io, what + ": " + std::strerror(errno));
}

void pwrite_all(int fd, const void* data, std::size_t n, std::uint64_t off) {
    const auto* p = static_cast<const char*>(data);
    while (n > 0) {
        const ssize_t w = ::pwrite(fd, p, n, static_cast<off_t>(off));
        if (w < 0) {
            if (errno == EINTR) continue;
            io_fail("pwrite");
        }
        p += w;
        n -= static_cast<std::size_t>(w);
        off += static_cast<std::uint64_t>(w);
    }
}

void pread_all(int fd, void* data, std::size_t n, std::uint64_t off) {
    auto* p = static_cast<char*>(data);
    while (n > 0) {
        const ssize_t r = ::pread(fd, p, n, static_cast<off_t>(off));
        if (r < 0) {
            if (errno == EINTR) continue;
            io_fail("pread");
        }
        if (r == 0) throw StoreError(StoreErrc::Corrupt, "unexpected end of file");
        p += r;
        n -= static_cast<std::size_t>(r);
        off += static_cast<std::uint64_t>(r);
    }
}

int open_file(const fs::path& p, bool read_only) {
    const int fd = read_only ? ::open(p.c_str(), O_RDONLY | O_CLOEXEC)
                             : ::open(p.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd < 0) io_fail("open " + p.string());
    return fd;
}

template <typename Rec>
Rec decode_record(std::span<const std::byte> bytes) {
    Rec r;
    std::memcpy(&r, bytes.data(), sizeof(Rec));
    return r;
}

PropEntry block_entry(const std::string& block, std::uint16_t i) {
    PropEntry e;
    std::memcpy(&e, block.data() + sizeof(PropBlockHeader) + i * sizeof(PropEntry), sizeof e);
    return e;
}

std::uint16_t block_count(const std::string& block) {
    PropBlockHeader h;
    std::memcpy(&h, block.data(), sizeof h);
    if (sizeof h + std::size_t{h.count} * sizeof(PropEntry) > block.size()) {
        throw StoreError(StoreErrc::Corrupt, "property directory overrun");
    }
    return h.count;
}

std::optional<PropertyValue> find_in_block(const std::string& block, std::uint32_t key) {
    if (block.empty()) return std::nullopt;
    const auto n = block_count(block);
    for (std::uint16_t i = 0; i < n; ++i) {
        const auto e = block_entry(block, i);
        if (e.key != key) continue;
        if (std::size_t{e.offset} + e.len > block.size()) {
            throw StoreError(StoreErrc::Corrupt, "property block overrun");
        }
        const auto* base = reinterpret_cast<const std::byte*>(block.data());
        return PropertyValue::decode_payload(static_cast<ValueTag>(e.tag),
                                             std::span<const std::byte>(base + e.offset, e.len));
    }
    return std::nullopt;
}

} // namespace

// ---------------------------------------------------------------- StoreStats

std::uint64_t StoreStats::label_count(std::string_view label) const {
    auto it = label_counts.find(std::string(label));
    return it == label_counts.end() ? 0 : it->second;
}

static double avg_degree(const std::map<std::pair<std::string, std::string>, std::uint64_t>& edges,
                         std::uint64_t nodes, std::string_view label, std::string_view rel_type) {
    if (nodes == 0) return 0.0;
    std::uint64_t total = 0;
    for (const auto& [k, n] : edges) {
        if (k.first == label && (rel_type.empty() || k.second == rel_type)) total += n;
    }
    return static_cast<double>(total) / static_cast<double>(nodes);
}

double StoreStats::avg_out_degree(std::string_view label, std::string_view rel_type) const {
    return avg_degree(out_edges, label_count(label), label, rel_type);
}

double StoreStats::avg_in_degree(std::string_view label, std::string_view rel_type) const {
    return avg_degree(in_edges, label_count(label), label, rel_type);
}

// ---------------------------------------------------------------- Catalog

std::optional<std::uint32_t> Catalog::find(std::string_view name) const {
    auto it = ids_.find(std::string(name));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

std::uint32_t Catalog::intern(std::string_view name) {
    if (auto id = find(name)) return *id;
    const auto id = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(name);
    ids_.emplace(names_.back(), id);
    return id;
}

// ---------------------------------------------------------------- GraphStore

GraphStore::Fd::~Fd() {
    if (fd >= 0) ::close(fd);
}

GraphStore::GraphStore(fs::path dir, StoreOptions opts)
    : dir_(std::move(dir)), opts_(opts), cache_(opts.page_cache_bytes) {}

std::unique_ptr<GraphStore> GraphStore::open(const fs::path& dir, StoreOptions opts) {
    std::unique_ptr<GraphStore> s(new GraphStore(dir, opts));
    const bool exists = fs::exists(dir / "meta.json");
    if (opts.read_only && !exists) {
        throw StoreError(StoreErrc::Io, "no store at " + dir.string());
    }
    if (!opts.read_only) fs::create_directories(dir / "index");

    s->nodes_fd_.fd = open_file(dir / "nodes.dat", opts.read_only);
    s->edges_fd_.fd = open_file(dir / "edges.dat", opts.read_only);
    s->props_fd_.fd = open_file(dir / "props.dat", opts.read_only);

    if (exists) {
        s->load_meta();
    } else {
        s->write_meta();
    }
    s->edges_flushed_ = s->edge_count_ * sizeof(EdgeRecord);
    s->props_flushed_ = s->props_size_;

    if (!opts.read_only) {
        s->node_mirror_.resize(s->node_count_);
        if (s->node_count_ > 0) {
            pread_all(s->nodes_fd_.fd, s->node_mirror_.data(), s->node_count_ * sizeof(NodeRecord), 0);
        }
        for (auto& idx : s->indexes_) s->load_index_entries(*idx);
    }
    return s;
}

GraphStore::~GraphStore() {
    if (!opts_.read_only) {
        try {
            std::lock_guard lock(write_mu_);
            flush_locked();
        } catch (...) {
            // destructor must not throw; an explicit flush() reports errors
        }
    }
    for (auto& idx : indexes_) {
        if (idx->fd >= 0) ::close(idx->fd);
    }
}

void GraphStore::load_meta() {
    std::ifstream in(dir_ / "meta.json");
    json m = json::parse(in);
    if (m.value("format", "") != "gtdb-store" || m.value("version", 0) != kFormatVersion) {
        throw StoreError(StoreErrc::Corrupt, "unrecognised meta.json in " + dir_.string());
    }
    for (const auto& n : m["labels"]) labels_.intern(n.get<std::string>());
    for (const auto& n : m["rel_types"]) rel_types_.intern(n.get<std::string>());
    for (const auto& n : m["property_keys"]) keys_.intern(n.get<std::string>());
    node_count_ = m["node_count"].get<std::uint64_t>();
    edge_count_ = m["edge_count"].get<std::uint64_t>();
    props_size_ = m["props_bytes"].get<std::uint64_t>();
    for (const auto& [name, n] : m["label_counts"].items()) label_counts_[*labels_.find(name)] = n.get<std::uint64_t>();
    for (const auto& [name, n] : m["rel_type_counts"].items()) type_counts_[*rel_types_.find(name)] = n.get<std::uint64_t>();
    auto load_edges = [&](const json& arr, auto& dst) {
        for (const auto& e : arr) {
            dst[{*labels_.find(e["label"].get<std::string>()), *rel_types_.find(e["rel_type"].get<std::string>())}] =
                e["edges"].get<std::uint64_t>();
        }
    };
    load_edges(m["out_edges"], out_edges_);
    load_edges(m["in_edges"], in_edges_);
    for (const auto& j : m["indexes"]) {
        auto idx = std::make_unique<IndexState>();
        idx->label = *labels_.find(j["label"].get<std::string>());
        idx->key = *keys_.find(j["key"].get<std::string>());
        idx->file = j["file"].get<std::string>();
        idx->capacity = j["capacity"].get<std::uint64_t>();
        idx->fd = open_file(dir_ / "index" / idx->file, opts_.read_only);
        IndexHeader h;
        pread_all(idx->fd, &h, sizeof h, 0);
        if (h.magic != kIndexMagic || h.capacity != idx->capacity) {
            throw StoreError(StoreErrc::Corrupt, "bad index file " + idx->file);
        }
        indexes_.push_back(std::move(idx));
    }
}

void GraphStore::write_meta() const {
    json m;
    m["format"] = "gtdb-store";
    m["version"] = kFormatVersion;
    m["node_count"] = node_count_;
    m["edge_count"] = edge_count_;
    m["props_bytes"] = props_size_;
    m["labels"] = labels_.names();
    m["rel_types"] = rel_types_.names();
    m["property_keys"] = keys_.names();
    m["label_counts"] = json::object();
    for (const auto& [id, n] : label_counts_) m["label_counts"][labels_.name(id)] = n;
    m["rel_type_counts"] = json::object();
    for (const auto& [id, n] : type_counts_) m["rel_type_counts"][rel_types_.name(id)] = n;
    auto dump_edges = [&](const auto& src) {
        json arr = json::array();
        for (const auto& [k, n] : src) {
            arr.push_back({{"label", labels_.name(k.first)}, {"rel_type", rel_types_.name(k.second)}, {"edges", n}});
        }
        return arr;
    };
    m["out_edges"] = dump_edges(out_edges_);
    m["in_edges"] = dump_edges(in_edges_);
    m["indexes"] = json::array();
    for (const auto& idx : indexes_) {
        m["indexes"].push_back({{"label", labels_.name(idx->label)},
                                {"key", keys_.name(idx->key)},
                                {"file", idx->file},
                                {"capacity", idx->capacity}});
    }
    const auto tmp = dir_ / "meta.json.tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << m.dump(2) << '\n';
        if (!out) io_fail("write meta.json");
    }
    fs::rename(tmp, dir_ / "meta.json");
}

void GraphStore::require_writable() {
    if (opts_.read_only) throw StoreError(StoreErrc::ReadOnly, "store opened read-only");
    if (readers_.load() > 0) {
        throw StoreError(StoreErrc::WriteConflict, "write while read transactions are open");
    }
}

std::string GraphStore::encode_props(const PropertyMap& props) {
    if (props.empty()) return {};
    std::string payload;
    std::vector<PropEntry> entries;
    entries.reserve(props.size());
    const std::uint32_t dir_bytes =
        static_cast<std::uint32_t>(sizeof(PropBlockHeader) + props.size() * sizeof(PropEntry));
    for (const auto& [k, v] : props) {
        PropEntry e;
        e.key = keys_.intern(k);
        e.tag = static_cast<std::uint8_t>(v.tag());
        e.offset = dir_bytes + static_cast<std::uint32_t>(payload.size());
        v.encode_payload(payload);
        e.len = dir_bytes + static_cast<std::uint32_t>(payload.size()) - e.offset;
        entries.push_back(e);
    }
    PropBlockHeader h;
    h.count = static_cast<std::uint16_t>(entries.size());
    std::string block(reinterpret_cast<const char*>(&h), sizeof h);
    block.append(reinterpret_cast<const char*>(entries.data()), entries.size() * sizeof(PropEntry));
    block += payload;
    return block;
}

void GraphStore::append(Fd& f, std::string& buf, std::uint64_t& flushed, const void* data, std::size_t n,
                        std::uint64_t& offset_out) {
    offset_out = flushed + buf.size();
    buf.append(static_cast<const char*>(data), n);
    if (buf.size() >= kWriteBufferLimit) {
        pwrite_all(f.fd, buf.data(), buf.size(), flushed);
        flushed += buf.size();
        buf.clear();
    }
}

GraphStore::IndexState* GraphStore::find_index(std::uint32_t label, std::uint32_t key) {
    for (auto& idx : indexes_) {
        if (idx->label == label && idx->key == key) return idx.get();
    }
    return nullptr;
}

bool GraphStore::has_index(std::string_view label, std::string_view key) const {
    auto l = labels_.find(label);
    auto k = keys_.find(key);
    if (!l || !k) return false;
    return std::any_of(indexes_.begin(), indexes_.end(),
                       [&](const auto& idx) { return idx->label == *l && idx->key == *k; });
}

NodeId GraphStore::create_node(std::span<const std::string> labels, const PropertyMap& props) {
    std::lock_guard lock(write_mu_);
    require_writable();
    if (labels.empty()) throw StoreError(StoreErrc::EmptyLabels, "a node needs at least one label");
    std::vector<std::string> uniq;
    for (const auto& l : labels) {
        if (std::find(uniq.begin(), uniq.end(), l) == uniq.end()) uniq.push_back(l);
    }
    if (uniq.size() > kMaxLabelsPerNode) {
        throw StoreError(StoreErrc::TooManyLabels, "at most 4 labels per node");
    }

    std::optional<ExternalId> ext;
    if (auto it = props.find(std::string(kIdKey)); it != props.end()) {
        ext = to_external_id(it->second);
        if (!ext) throw StoreError(StoreErrc::TypeMismatch, "`id` must be an integer or a string");
        for (const auto& l : uniq) {
            auto lid = labels_.find(l);
            auto kid = keys_.find(kIdKey);
            if (!lid || !kid) continue;
            if (auto* idx = find_index(*lid, *kid); idx && idx->entries.count(*ext)) {
                throw StoreError(StoreErrc::DuplicateId, "id " + to_string(*ext) + " already used under label " + l);
            }
        }
    }

    NodeRecord rec;
    rec.flags = kRecordInUse;
    rec.label_count = static_cast<std::uint16_t>(uniq.size());
    for (std::size_t i = 0; i < uniq.size(); ++i) rec.labels[i] = labels_.intern(uniq[i]);
    const std::string block = encode_props(props);
    if (!block.empty()) {
        append(props_fd_, props_buf_, props_flushed_, block.data(), block.size(), rec.props_offset);
        rec.props_len = static_cast<std::uint32_t>(block.size());
        props_size_ += block.size();
    }

    const NodeId id = node_count_++;
    node_mirror_.push_back(rec);
    for (std::size_t i = 0; i < rec.label_count; ++i) ++label_counts_[rec.labels[i]];

    if (ext) {
        const auto kid = keys_.intern(kIdKey);
        for (std::size_t i = 0; i < rec.label_count; ++i) {
            auto* idx = find_index(rec.labels[i], kid);
            if (!idx) {
                auto fresh = std::make_unique<IndexState>();
                fresh->label = rec.labels[i];
                fresh->key = kid;
                fresh->file = "label_" + std::to_string(fresh->label) + ".key_" + std::to_string(kid) + ".idx";
                fresh->fd = open_file(dir_ / "index" / fresh->file, false);
                idx = fresh.get();
                indexes_.push_back(std::move(fresh));
            }
            idx->entries.emplace(*ext, id);
        }
    }
    dirty_ = true;
    return id;
}

EdgeId GraphStore::create_edge(NodeId src, NodeId dst, std::string_view rel_type, const PropertyMap& props) {
    std::lock_guard lock(write_mu_);
    require_writable();
    if (src >= node_count_) throw StoreError(StoreErrc::UnknownNode, "source node " + std::to_string(src));
    if (dst >= node_count_) throw StoreError(StoreErrc::UnknownNode, "target node " + std::to_string(dst));

    const EdgeId id = edge_count_;
    EdgeRecord e;
    e.flags = kRecordInUse;
    e.type = rel_types_.intern(rel_type);
    e.src = src;
    e.dst = dst;
    e.next_out = node_mirror_[src].first_out;
    e.next_in = node_mirror_[dst].first_in;
    const std::string block = encode_props(props);
    if (!block.empty()) {
        append(props_fd_, props_buf_, props_flushed_, block.data(), block.size(), e.props_offset);
        e.props_len = static_cast<std::uint32_t>(block.size());
        props_size_ += block.size();
    }
    std::uint64_t off;
    append(edges_fd_, edge_buf_, edges_flushed_, &e, sizeof e, off);

    auto& s = node_mirror_[src];
    s.first_out = id;
    ++s.out_degree;
    auto& d = node_mirror_[dst];
    d.first_in = id;
    ++d.in_degree;
    ++edge_count_;
    ++type_counts_[e.type];
    for (std::size_t i = 0; i < s.label_count; ++i) ++out_edges_[{s.labels[i], e.type}];
    for (std::size_t i = 0; i < d.label_count; ++i) ++in_edges_[{d.labels[i], e.type}];
    dirty_ = true;
    return id;
}

void GraphStore::flush() {
    std::lock_guard lock(write_mu_);
    if (opts_.read_only) return;
    flush_locked();
}

void GraphStore::flush_locked() {
    if (!dirty_) return;
    if (!edge_buf_.empty()) {
        pwrite_all(edges_fd_.fd, edge_buf_.data(), edge_buf_.size(), edges_flushed_);
        edges_flushed_ += edge_buf_.size();
        edge_buf_.clear();
    }
    if (!props_buf_.empty()) {
        pwrite_all(props_fd_.fd, props_buf_.data(), props_buf_.size(), props_flushed_);
        props_flushed_ += props_buf_.size();
        props_buf_.clear();
    }
    if (!node_mirror_.empty()) {
        pwrite_all(nodes_fd_.fd, node_mirror_.data(), node_mirror_.size() * sizeof(NodeRecord), 0);
    }
    for (auto& idx : indexes_) write_index(*idx);
    write_meta();
    cache_.clear();
    dirty_ = false;
}

void GraphStore::write_index(IndexState& idx) {
    const std::uint64_t capacity = std::bit_ceil(std::max<std::uint64_t>(16, 2 * idx.entries.size()));
    std::vector<IndexSlot> slots(capacity);
    // insert in node order so the file is a function of the data alone
    std::vector<std::pair<NodeId, const ExternalId*>> ordered;
    ordered.reserve(idx.entries.size());
    for (const auto& [ext, node] : idx.entries) ordered.emplace_back(node, &ext);
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [node, ext] : ordered) {
        const auto h = to_property(*ext).stable_hash();
        auto pos = h & (capacity - 1);
        while (slots[pos].node != kNil) pos = (pos + 1) & (capacity - 1);
        slots[pos] = IndexSlot{h, node};
    }
    IndexHeader hdr;
    hdr.magic = kIndexMagic;
    hdr.capacity = capacity;
    hdr.count = idx.entries.size();
    hdr.label = idx.label;
    hdr.key = idx.key;
    if (::ftruncate(idx.fd, 0) != 0) io_fail("truncate index");
    pwrite_all(idx.fd, &hdr, sizeof hdr, 0);
    pwrite_all(idx.fd, slots.data(), slots.size() * sizeof(IndexSlot), sizeof hdr);
    idx.capacity = capacity;
}

void GraphStore::load_index_entries(IndexState& idx) {
    std::vector<IndexSlot> slots(idx.capacity);
    pread_all(idx.fd, slots.data(), slots.size() * sizeof(IndexSlot), sizeof(IndexHeader));
    AccessCounters scratch;
    std::string buf;
    for (const auto& s : slots) {
        if (s.node == kNil) continue;
        const auto& rec = node_mirror_.at(s.node);
        read_props(rec.props_offset, rec.props_len, buf, scratch);
        auto v = find_in_block(buf, idx.key);
        if (!v) throw StoreError(StoreErrc::Corrupt, "index entry without id property");
        idx.entries.emplace(*to_external_id(*v), s.node);
    }
}

ReadTxn GraphStore::begin_read() {
    std::lock_guard lock(write_mu_);
    if (!opts_.read_only) flush_locked();
    readers_.fetch_add(1);
    return ReadTxn(this);
}

void GraphStore::end_read(const AccessCounters& c) noexcept {
    total_hits_.fetch_add(c.db_hits, std::memory_order_relaxed);
    total_cache_hits_.fetch_add(c.page_cache_hits, std::memory_order_relaxed);
    total_cache_misses_.fetch_add(c.page_cache_misses, std::memory_order_relaxed);
    readers_.fetch_sub(1);
}

StoreStats GraphStore::stats() const {
    std::lock_guard lock(write_mu_);
    StoreStats s;
    s.node_count = node_count_;
    s.edge_count = edge_count_;
    for (const auto& [id, n] : label_counts_) s.label_counts[labels_.name(id)] = n;
    for (const auto& [id, n] : type_counts_) s.rel_type_counts[rel_types_.name(id)] = n;
    for (const auto& [k, n] : out_edges_) s.out_edges[{labels_.name(k.first), rel_types_.name(k.second)}] = n;
    for (const auto& [k, n] : in_edges_) s.in_edges[{labels_.name(k.first), rel_types_.name(k.second)}] = n;
    return s;
}

AccessCounters GraphStore::totals() const {
    AccessCounters c;
    c.db_hits = total_hits_.load();
    c.page_cache_hits = total_cache_hits_.load();
    c.page_cache_misses = total_cache_misses_.load();
    return c;
}

void GraphStore::reset_totals() {
    if (readers_.load() > 0) {
        throw StoreError(StoreErrc::WriteConflict, "counters reset while read transactions are open");
    }
    total_hits_ = 0;
    total_cache_hits_ = 0;
    total_cache_misses_ = 0;
}

NodeRecord GraphStore::read_node(NodeId id, AccessCounters& c) {
    std::byte buf[sizeof(NodeRecord)];
    cache_.read(nodes_fd_.fd, kNodesFile, id * sizeof(NodeRecord), buf, c);
    auto rec = decode_record<NodeRecord>(buf);
    if (!(rec.flags & kRecordInUse)) throw StoreError(StoreErrc::Corrupt, "node record " + std::to_string(id));
    return rec;
}

EdgeRecord GraphStore::read_edge(EdgeId id, AccessCounters& c) {
    std::byte buf[sizeof(EdgeRecord)];
    cache_.read(edges_fd_.fd, kEdgesFile, id * sizeof(EdgeRecord), buf, c);
    auto rec = decode_record<EdgeRecord>(buf);
    if (!(rec.flags & kRecordInUse)) throw StoreError(StoreErrc::Corrupt, "edge record " + std::to_string(id));
    return rec;
}

void GraphStore::read_props(std::uint64_t off, std::uint32_t len, std::string& out, AccessCounters& c) {
    out.resize(len);
    if (len == 0) return;
    // flushed data only; the writer never serves reads with a dirty buffer
    cache_.read(props_fd_.fd, kPropsFile, off, std::as_writable_bytes(std::span(out.data(), out.size())), c);
}

// ---------------------------------------------------------------- ReadTxn

ReadTxn::ReadTxn(ReadTxn&& o) noexcept
    : store_(std::exchange(o.store_, nullptr)), counters_(o.counters_), scratch_(std::move(o.scratch_)) {}

ReadTxn::~ReadTxn() {
    if (store_) store_->end_read(counters_);
}

NodeRecord ReadTxn::checked_node(NodeId id) {
    if (id >= store_->node_count_) throw StoreError(StoreErrc::UnknownNode, "node " + std::to_string(id));
    return store_->read_node(id, counters_);
}

NodeRecord ReadTxn::node(NodeId id) {
    auto rec = checked_node(id);
    charge(1);
    return rec;
}

std::vector<std::string> ReadTxn::node_labels(NodeId id) {
    const auto rec = node(id);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < rec.label_count; ++i) out.push_back(store_->labels_.name(rec.labels[i]));
    return out;
}

bool ReadTxn::has_label(NodeId id, std::uint32_t label_id) {
    const auto rec = node(id);
    for (std::size_t i = 0; i < rec.label_count; ++i) {
        if (rec.labels[i] == label_id) return true;
    }
    return false;
}

bool ReadTxn::has_label(NodeId id, std::string_view label) {
    auto lid = store_->labels_.find(label);
    if (!lid) {
        node(id); // the record is still touched
        return false;
    }
    return has_label(id, *lid);
}

std::optional<PropertyValue> ReadTxn::find_prop(std::uint64_t off, std::uint32_t len, std::uint32_t key) {
    if (len == 0) return std::nullopt;
    store_->read_props(off, len, scratch_, counters_);
    return find_in_block(scratch_, key);
}

std::vector<std::string> ReadTxn::prop_keys(std::uint64_t off, std::uint32_t len) {
    std::vector<std::string> out;
    if (len == 0) return out;
    store_->read_props(off, len, scratch_, counters_);
    const auto n = block_count(scratch_);
    for (std::uint16_t i = 0; i < n; ++i) out.push_back(store_->keys_.name(block_entry(scratch_, i).key));
    return out;
}

std::optional<PropertyValue> ReadTxn::get_property(NodeId id, std::string_view key) {
    const auto rec = checked_node(id);
    charge(1);
    auto kid = store_->keys_.find(key);
    if (!kid) return std::nullopt;
    return find_prop(rec.props_offset, rec.props_len, *kid);
}

std::vector<std::string> ReadTxn::property_keys(NodeId id) {
    const auto rec = node(id);
    return prop_keys(rec.props_offset, rec.props_len);
}

EdgeView ReadTxn::edge(EdgeId id) {
    if (id >= store_->edge_count_) throw StoreError(StoreErrc::UnknownEdge, "edge " + std::to_string(id));
    const auto rec = store_->read_edge(id, counters_);
    charge(1);
    return EdgeView{id, rec.src, rec.dst, rec.type};
}

std::optional<PropertyValue> ReadTxn::get_edge_property(EdgeId id, std::string_view key) {
    if (id >= store_->edge_count_) throw StoreError(StoreErrc::UnknownEdge, "edge " + std::to_string(id));
    const auto rec = store_->read_edge(id, counters_);
    charge(1);
    auto kid = store_->keys_.find(key);
    if (!kid) return std::nullopt;
    return find_prop(rec.props_offset, rec.props_len, *kid);
}

std::vector<std::string> ReadTxn::edge_property_keys(EdgeId id) {
    if (id >= store_->edge_count_) throw StoreError(StoreErrc::UnknownEdge, "edge " + std::to_string(id));
    const auto rec = store_->read_edge(id, counters_);
    charge(1);
    return prop_keys(rec.props_offset, rec.props_len);
}

std::vector<NodeId> ReadTxn::node_index_seek(std::string_view label, std::string_view key,
                                             std::span<const PropertyValue> values) {
    auto lid = store_->labels_.find(label);
    auto kid = store_->keys_.find(key);
    GraphStore::IndexState* idx = (lid && kid) ? store_->find_index(*lid, *kid) : nullptr;
    if (!idx) {
        throw StoreError(StoreErrc::IndexNotFound, "no index on :" + std::string(label) + "(" + std::string(key) + ")");
    }
    std::vector<NodeId> out;
    std::set<NodeId> seen;
    std::uint32_t fid = kFirstIndexFile;
    for (std::size_t i = 0; i < store_->indexes_.size(); ++i) {
        if (store_->indexes_[i].get() == idx) fid = kFirstIndexFile + static_cast<std::uint32_t>(i);
    }
    const std::uint64_t mask = idx->capacity - 1;
    for (const auto& v : values) {
        auto ext = to_external_id(v);
        if (!ext) continue;
        const auto h = v.stable_hash();
        for (std::uint64_t pos = h & mask;; pos = (pos + 1) & mask) {
            std::byte buf[sizeof(IndexSlot)];
            store_->cache_.read(idx->fd, fid, sizeof(IndexHeader) + pos * sizeof(IndexSlot), buf, counters_);
            const auto slot = decode_record<IndexSlot>(buf);
            if (slot.node == kNil) break;
            if (slot.hash != h) continue;
            const auto rec = store_->read_node(slot.node, counters_);
            auto stored = find_prop(rec.props_offset, rec.props_len, idx->key);
            if (!stored || stored->tag() != v.tag() || !(*stored == v)) continue;
            charge(2);
            if (seen.insert(slot.node).second) out.push_back(slot.node);
            break;
        }
    }
    return out;
}

ExpandCursor ReadTxn::expand(NodeId from, Direction dir, std::optional<std::string_view> rel_type) {
    const auto rec = node(from);
    std::optional<std::uint32_t> type;
    bool missing = false;
    if (rel_type) {
        type = store_->rel_types_.find(*rel_type);
        missing = !type.has_value();
    }
    return ExpandCursor(this, from, rec, dir, type, missing);
}

// ---------------------------------------------------------------- ExpandCursor

ExpandCursor::ExpandCursor(ReadTxn* txn, NodeId node, const NodeRecord& rec, Direction dir,
                           std::optional<std::uint32_t> type, bool type_missing)
    : txn_(txn), node_(node), outgoing_phase_(dir != Direction::In), dir_(dir), type_(type),
      exhausted_(type_missing) {
    cur_ = dir == Direction::In ? rec.first_in : rec.first_out;
    next_in_ = rec.first_in;
}

bool ExpandCursor::next(EdgeView& out) {
    if (exhausted_) return false;
    for (;;) {
        if (cur_ == kNil) {
            if (outgoing_phase_ && dir_ == Direction::Both) {
                outgoing_phase_ = false;
                cur_ = next_in_;
                continue;
            }
            exhausted_ = true;
            return false;
        }
        const EdgeId id = cur_;
        const auto e = txn_->store_->read_edge(id, txn_->counters_);
        txn_->charge(1);
        cur_ = outgoing_phase_ ? e.next_out : e.next_in;
        if (type_ && e.type != *type_) continue;
        out = EdgeView{id, e.src, e.dst, e.type};
        out.neighbour = outgoing_phase_ ? e.dst : e.src;
        return true;
    }
}

} // namespace gtdb
