#pragma once

#include <cstdint>

// On-disk record layouts. All integers little-endian; see docs/storage_format.md.

namespace gtdb {

using NodeId = std::uint64_t;
using EdgeId = std::uint64_t;
inline constexpr std::uint64_t kNil = ~std::uint64_t{0};

inline constexpr std::uint32_t kMaxLabelsPerNode = 4;
inline constexpr std::uint32_t kRecordInUse = 1u;

struct NodeRecord {
    std::uint32_t flags = 0;
    std::uint16_t label_count = 0;
    std::uint16_t reserved0 = 0;
    std::uint32_t labels[kMaxLabelsPerNode] = {};
    std::uint32_t out_degree = 0;
    std::uint32_t in_degree = 0;
    std::uint64_t first_out = kNil;
    std::uint64_t first_in = kNil;
    std::uint64_t props_offset = 0;
    std::uint32_t props_len = 0;
    std::uint32_t reserved1 = 0;
};
static_assert(sizeof(NodeRecord) == 64);

struct EdgeRecord {
    std::uint32_t flags = 0;
    std::uint32_t type = 0;
    std::uint64_t src = kNil;
    std::uint64_t dst = kNil;
    std::uint64_t next_out = kNil;
    std::uint64_t next_in = kNil;
    std::uint64_t props_offset = 0;
    std::uint32_t props_len = 0;
    std::uint32_t reserved[3] = {};
};
static_assert(sizeof(EdgeRecord) == 64);

// Property block: header, `count` directory entries, then payload bytes.
struct PropBlockHeader {
    std::uint16_t count = 0;
    std::uint16_t reserved = 0;
};
static_assert(sizeof(PropBlockHeader) == 4);

struct PropEntry {
    std::uint32_t key = 0;
    std::uint8_t tag = 0;
    std::uint8_t pad[3] = {};
    std::uint32_t offset = 0; // from block start
    std::uint32_t len = 0;
};
static_assert(sizeof(PropEntry) == 16);

// Hash index file: 64-byte header followed by `capacity` 16-byte slots with
// linear probing. An empty slot has node == kNil.
struct IndexHeader {
    std::uint64_t magic = 0;
    std::uint64_t capacity = 0;
    std::uint64_t count = 0;
    std::uint32_t label = 0;
    std::uint32_t key = 0;
    std::uint64_t reserved[4] = {};
};
static_assert(sizeof(IndexHeader) == 64);

struct IndexSlot {
    std::uint64_t hash = 0;
    std::uint64_t node = kNil;
};
static_assert(sizeof(IndexSlot) == 16);

inline constexpr std::uint64_t kIndexMagic = 0x5844494244544731ULL; // "1GTDBIDX"

} // namespace gtdb
