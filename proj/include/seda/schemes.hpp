#pragma once

// Memory-protection scheme models. Each turns a data-only trace into data
// plus security-metadata traffic: unprotected, SGX-like (VN + MAC + Bonsai
// tree through metadata caches), MGX-like (on-chip VN, MAC only) and SeDA
// (on-chip block MACs folded into layer MACs).

#include "seda/workload.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace seda::schemes {

using workload::Direction;
using workload::EventClass;
using workload::TraceEvent;

enum class SchemeKind { Unprotected, SgxLike, MgxLike, Seda };
enum class LayerMacResidency { OnChip, OffChip };
/// Whether the next layer waits for the off-chip layer-MAC check.
enum class LayerVerifyMode { Speculative, Stall };

struct SchemeConfig {
    SchemeKind kind = SchemeKind::Unprotected;
    std::uint32_t protection_block_bytes = 64;
    LayerMacResidency layer_mac_residency = LayerMacResidency::OffChip;
    LayerVerifyMode layer_verify = LayerVerifyMode::Speculative;
    std::uint64_t protected_memory_bytes = 16ull << 30;
    std::uint64_t vn_cache_bytes = 16 << 10;
    std::uint64_t mac_cache_bytes = 8 << 10;
    std::uint32_t cache_line_bytes = 64;
    std::uint32_t cache_ways = 4;
    std::uint32_t tree_arity = 8;
    unsigned vn_bits = 56;

    /// "unprotected", "sgx_64", "mgx_512", "seda", ...
    std::string label() const;
    void validate() const;
};

/// Parses a scheme label as produced by SchemeConfig::label().
SchemeConfig scheme_from_label(std::string_view label);

std::string_view to_string(SchemeKind kind);

struct CacheConfig {
    std::uint64_t capacity_bytes = 16 << 10;
    std::uint32_t line_bytes = 64;
    /// Fill/dirty-tracking granularity; equal to line_bytes for whole-line fills.
    std::uint32_t sector_bytes = 64;
    std::uint32_t ways = 4;
};

struct Writeback {
    std::uint64_t line_address = 0;
    std::uint64_t address = 0;
    std::uint32_t bytes = 0;
};

struct CacheAccess {
    bool hit = false;
    /// Bytes fetched from memory to satisfy the access (0 on hits and
    /// no-fetch write allocations).
    std::uint32_t fill_bytes = 0;
    std::uint64_t fill_address = 0;
    std::optional<Writeback> writeback;
};

struct CacheCounters {
    std::uint64_t lookups = 0;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t writebacks = 0;
    std::uint64_t writeback_bytes = 0;
    std::uint64_t fill_bytes = 0;
    std::uint64_t dirty_bytes_created = 0;
};

/// Set-associative, LRU, write-back, write-allocate cache with per-sector
/// valid/dirty bits.
class MetadataCache {
public:
    explicit MetadataCache(const CacheConfig& config);

    CacheAccess read(std::uint64_t address);
    /// With fetch_on_miss the missing sector is read first (read-modify-write);
    /// without it the sector is allocated and fully overwritten.
    CacheAccess write(std::uint64_t address, bool fetch_on_miss);
    bool contains(std::uint64_t address) const;
    std::vector<Writeback> flush();

    const CacheConfig& config() const noexcept { return config_; }
    const CacheCounters& counters() const noexcept { return counters_; }
    std::size_t sets() const noexcept { return sets_; }
    std::size_t resident_lines() const;

private:
    struct Line {
        std::uint64_t tag = 0;
        std::uint64_t valid_sectors = 0;
        std::uint64_t dirty_sectors = 0;
        std::uint64_t stamp = 0;
        bool valid = false;
    };

    CacheAccess access(std::uint64_t address, bool is_write, bool fetch_on_miss);
    Writeback make_writeback(const Line& line, std::size_t set) const;

    CacheConfig config_;
    std::size_t sets_;
    std::uint32_t sectors_per_line_;
    std::vector<Line> lines_;
    std::uint64_t clock_ = 0;
    CacheCounters counters_;
};

/// Bonsai Merkle tree geometry over the per-block version numbers. Level 1
/// holds the packed VN lines (one per `arity` blocks), levels 2..depth-1 are
/// off-chip tree nodes, and level `depth` is the single on-chip root.
class BonsaiTree {
public:
    BonsaiTree(std::uint64_t protected_bytes, std::uint32_t block_bytes, std::uint32_t arity,
               std::uint64_t vn_base, std::uint64_t tree_base, std::uint32_t node_bytes = 64);

    std::uint64_t leaf_count() const noexcept { return leaf_count_; }
    std::uint32_t depth() const noexcept { return depth_; }
    std::uint32_t arity() const noexcept { return arity_; }
    std::uint64_t node_count(std::uint32_t level) const;
    std::uint64_t node_index(std::uint32_t level, std::uint64_t block) const;
    std::uint64_t node_address(std::uint32_t level, std::uint64_t index) const;
    bool is_root(std::uint32_t level) const noexcept { return level >= depth_; }
    /// Off-chip node reads a fully cold verification walk costs (levels 2..depth-1).
    std::uint32_t off_chip_tree_levels() const noexcept { return depth_ - 2; }
    std::uint64_t end_address() const noexcept { return end_; }

    struct NodeId {
        std::uint32_t level = 0;
        std::uint64_t index = 0;
    };
    std::optional<NodeId> locate(std::uint64_t address) const;

    std::uint64_t on_chip_root = 0;

private:
    std::uint64_t leaf_count_;
    std::uint32_t arity_;
    std::uint32_t depth_;
    std::uint32_t node_bytes_;
    std::uint64_t vn_base_;
    std::vector<std::uint64_t> level_base_;  // indexed by level; [0] unused
    std::uint64_t end_;
};

struct SchemeStats {
    // bytes[class][direction]
    std::array<std::array<std::uint64_t, 2>, 4> bytes{};
    std::uint64_t total_events = 0;

    std::uint64_t class_bytes(EventClass cls) const {
        const auto& b = bytes[static_cast<std::size_t>(cls)];
        return b[0] + b[1];
    }
    std::uint64_t data_bytes() const { return class_bytes(EventClass::Data); }
    std::uint64_t vn_bytes() const { return class_bytes(EventClass::Vn); }
    std::uint64_t mac_bytes() const { return class_bytes(EventClass::Mac); }
    std::uint64_t tree_bytes() const { return class_bytes(EventClass::TreeNode); }
    std::uint64_t metadata_bytes() const { return vn_bytes() + mac_bytes() + tree_bytes(); }
    std::uint64_t total_bytes() const { return data_bytes() + metadata_bytes(); }

    void add(const TraceEvent& e);
    friend bool operator==(const SchemeStats&, const SchemeStats&) = default;
};

SchemeStats stats_of(std::span<const TraceEvent> events);

struct AugmentedTrace {
    std::vector<TraceEvent> events;
    SchemeStats stats;
    /// Events whose completion gates every later event (stalling layer checks).
    std::vector<std::size_t> barriers;
    CacheCounters vn_cache;
    CacheCounters mac_cache;
};

/// Address plan for security metadata above the protected data region.
struct MetadataLayout {
    std::uint64_t vn_base = 0;
    std::uint64_t mac_base = 0;
    std::uint64_t tree_base = 0;
    std::uint64_t layer_mac_base = 0;
};

MetadataLayout metadata_layout(const SchemeConfig& config);

/// Emits metadata events for one scheme, one data event at a time.
class ProtectionEngine {
public:
    explicit ProtectionEngine(const SchemeConfig& config);

    /// sgx_access / mgx_access: metadata events for every protection block the
    /// event touches. Unprotected and SeDA return nothing here.
    std::vector<TraceEvent> access(const TraceEvent& data_event);
    /// SeDA layer boundaries: events for entering / leaving a layer.
    std::vector<TraceEvent> enter_layer(std::size_t layer_ordinal, std::uint64_t cycle);
    std::vector<TraceEvent> leave_layer(std::size_t layer_ordinal, std::uint64_t cycle);
    /// Writes back every dirty metadata line (and the tree updates it causes).
    std::vector<TraceEvent> finish(std::uint64_t cycle);

    const SchemeConfig& config() const noexcept { return config_; }
    const MetadataLayout& layout() const noexcept { return layout_; }
    const std::optional<BonsaiTree>& tree() const noexcept { return tree_; }
    const std::optional<MetadataCache>& vn_cache() const noexcept { return vn_cache_; }
    const std::optional<MetadataCache>& mac_cache() const noexcept { return mac_cache_; }
    std::uint64_t version(std::uint64_t block) const;

private:
    void block_access(std::uint64_t block, Direction dir, std::uint64_t cycle,
                      std::vector<TraceEvent>& out);
    void touch_node(std::uint32_t level, std::uint64_t index, bool write, std::uint64_t cycle,
                    std::vector<TraceEvent>& out);
    void handle_vn_writeback(const std::optional<Writeback>& wb, std::uint64_t cycle,
                             std::vector<TraceEvent>& out);
    void handle_mac_writeback(const std::optional<Writeback>& wb, std::uint64_t cycle,
                              std::vector<TraceEvent>& out);
    void drain_pending(std::uint64_t cycle, std::vector<TraceEvent>& out);

    SchemeConfig config_;
    MetadataLayout layout_;
    std::optional<BonsaiTree> tree_;
    std::optional<MetadataCache> vn_cache_;
    std::optional<MetadataCache> mac_cache_;
    std::unordered_map<std::uint64_t, std::uint64_t> versions_;
    std::vector<BonsaiTree::NodeId> pending_parent_updates_;
};

/// Splits each data event into protection blocks and appends the scheme's
/// metadata traffic. SeDA requires `layers` to cover the whole trace.
AugmentedTrace process_trace(const SchemeConfig& config, std::span<const TraceEvent> data_trace,
                             std::span<const workload::LayerSpan> layers = {});

std::string stats_csv_header();
std::string stats_csv_row(std::string_view workload, const SchemeConfig& config,
                          const SchemeStats& stats);

}  // namespace seda::schemes
