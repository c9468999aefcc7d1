#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gtdb {

/// Tracks bytes held by graph-data buffers (query operator state, decoded
/// subgraphs). This is internal accounting of what the code retains, not OS RSS.
class MemoryMeter {
public:
    void add(std::int64_t bytes) noexcept {
        const auto now = current_.fetch_add(bytes, std::memory_order_relaxed) + bytes;
        auto peak = peak_.load(std::memory_order_relaxed);
        while (now > peak && !peak_.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
        }
    }
    void sub(std::int64_t bytes) noexcept { current_.fetch_sub(bytes, std::memory_order_relaxed); }

    std::int64_t current() const noexcept { return current_.load(std::memory_order_relaxed); }
    std::int64_t peak() const noexcept { return peak_.load(std::memory_order_relaxed); }
    void reset_peak() noexcept { peak_.store(current(), std::memory_order_relaxed); }

private:
    std::atomic<std::int64_t> current_{0};
    std::atomic<std::int64_t> peak_{0};
};

inline std::size_t footprint(const std::string& s) {
    // SSO strings live inside the object
    return sizeof(std::string) + (s.capacity() > 15 ? s.capacity() + 1 : 0);
}

template <typename T>
std::size_t footprint_shallow(const std::vector<T>& v) {
    return sizeof(v) + v.capacity() * sizeof(T);
}

} // namespace gtdb
