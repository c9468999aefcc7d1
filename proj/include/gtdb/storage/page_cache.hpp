#pragma once

#include <cstddef>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

namespace gtdb {

struct AccessCounters {
    std::uint64_t db_hits = 0;
    std::uint64_t page_cache_hits = 0;
    std::uint64_t page_cache_misses = 0;

    AccessCounters& operator+=(const AccessCounters& o) noexcept {
        db_hits += o.db_hits;
        page_cache_hits += o.page_cache_hits;
        page_cache_misses += o.page_cache_misses;
        return *this;
    }
    friend bool operator==(const AccessCounters&, const AccessCounters&) = default;
};

/// Fixed-capacity LRU cache of 8 KiB file pages, sharded by page key so that
/// concurrent readers mostly take different locks. Misses are served with
/// pread(2) outside the shard lock.
class PageCache {
public:
    static constexpr std::size_t kPageSize = 8192;
    static constexpr std::size_t kMaxShards = 16;

    explicit PageCache(std::size_t capacity_bytes);

    PageCache(const PageCache&) = delete;
    PageCache& operator=(const PageCache&) = delete;

    /// Copies `dst.size()` bytes at `offset` of file `fd` into dst. `file_id`
    /// is the cache's name for the file; bytes past EOF read as zero.
    void read(int fd, std::uint32_t file_id, std::uint64_t offset, std::span<std::byte> dst,
              AccessCounters& counters);

    /// Drops every cached page (used after the writer flushes).
    void clear();

    std::size_t capacity_pages() const noexcept { return capacity_pages_; }
    std::size_t resident_pages() const;

private:
    struct Frame {
        std::uint64_t key;
        std::unique_ptr<std::byte[]> data;
    };
    struct Shard {
        std::mutex mu;
        std::list<Frame> lru; // front = most recent
        std::unordered_map<std::uint64_t, std::list<Frame>::iterator> map;
        std::size_t capacity = 0;
    };

    static std::uint64_t page_key(std::uint32_t file_id, std::uint64_t page_no) noexcept {
        return (static_cast<std::uint64_t>(file_id) << 48) | page_no;
    }
    Shard& shard_for(std::uint64_t key) noexcept;
    void read_page(int fd, std::uint32_t file_id, std::uint64_t page_no, std::size_t in_page,
                   std::span<std::byte> dst, AccessCounters& counters);

    std::size_t capacity_pages_;
    std::vector<std::unique_ptr<Shard>> shards_;
};

} // namespace gtdb
