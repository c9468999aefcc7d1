#include "gtdb/storage/page_cache.hpp"

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "gtdb/common/error.hpp"
#include "gtdb/common/rng.hpp"

namespace gtdb {

PageCache::PageCache(std::size_t capacity_bytes)
    : capacity_pages_(std::max<std::size_t>(1, capacity_bytes / kPageSize)) {
    const std::size_t shards = std::clamp<std::size_t>(capacity_pages_ / 8, 1, kMaxShards);
    for (std::size_t i = 0; i < shards; ++i) {
        auto s = std::make_unique<Shard>();
        s->capacity = capacity_pages_ / shards + (i < capacity_pages_ % shards ? 1 : 0);
        shards_.push_back(std::move(s));
    }
}

PageCache::Shard& PageCache::shard_for(std::uint64_t key) noexcept {
    return *shards_[mix64(key) % shards_.size()];
}

void PageCache::read(int fd, std::uint32_t file_id, std::uint64_t offset, std::span<std::byte> dst,
                     AccessCounters& counters) {
    std::size_t done = 0;
    while (done < dst.size()) {
        const std::uint64_t pos = offset + done;
        const std::uint64_t page_no = pos / kPageSize;
        const std::size_t in_page = pos % kPageSize;
        const std::size_t n = std::min(dst.size() - done, kPageSize - in_page);
        read_page(fd, file_id, page_no, in_page, dst.subspan(done, n), counters);
        done += n;
    }
}

void PageCache::read_page(int fd, std::uint32_t file_id, std::uint64_t page_no, std::size_t in_page,
                          std::span<std::byte> dst, AccessCounters& counters) {
    const auto key = page_key(file_id, page_no);
    Shard& shard = shard_for(key);
    {
        std::lock_guard lock(shard.mu);
        if (auto it = shard.map.find(key); it != shard.map.end()) {
            shard.lru.splice(shard.lru.begin(), shard.lru, it->second);
            std::memcpy(dst.data(), it->second->data.get() + in_page, dst.size());
            ++counters.page_cache_hits;
            return;
        }
    }
    ++counters.page_cache_misses;

    auto buf = std::make_unique<std::byte[]>(kPageSize);
    std::size_t got = 0;
    while (got < kPageSize) {
        const ssize_t r = ::pread(fd, buf.get() + got, kPageSize - got,
                                  static_cast<off_t>(page_no * kPageSize + got));
        if (r < 0) {
            if (errno == EINTR) continue;
            throw StoreError(StoreErrc::Io, std::string("pread failed: ") + std::strerror(errno));
        }
        if (r == 0) break;
        got += static_cast<std::size_t>(r);
    }
    std::memset(buf.get() + got, 0, kPageSize - got);
    std::memcpy(dst.data(), buf.get() + in_page, dst.size());

    std::lock_guard lock(shard.mu);
    if (shard.map.count(key)) return; // another reader loaded it meanwhile
    if (shard.lru.size() >= shard.capacity) {
        auto& victim = shard.lru.back();
        shard.map.erase(victim.key);
        shard.lru.pop_back();
    }
    shard.lru.push_front(Frame{key, std::move(buf)});
    shard.map.emplace(key, shard.lru.begin());
}

void PageCache::clear() {
    for (auto& s : shards_) {
        std::lock_guard lock(s->mu);
        s->map.clear();
        s->lru.clear();
    }
}

std::size_t PageCache::resident_pages() const {
    std::size_t n = 0;
    for (const auto& s : shards_) {
        std::lock_guard lock(s->mu);
        n += s->lru.size();
    }
    return n;
}

} // namespace gtdb
