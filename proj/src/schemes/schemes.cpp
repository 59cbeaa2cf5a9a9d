#include "seda/schemes.hpp"

#include "seda/common.hpp"
#include "seda/integrity.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace seda::schemes {
namespace {

constexpr std::uint64_t kRegionAlignment = 4096;
// Coalesced metadata bursts never exceed one page.
constexpr std::uint32_t kMaxCoalescedBytes = 4096;

constexpr std::uint64_t align_up(std::uint64_t v, std::uint64_t a) { return (v + a - 1) / a * a; }

void push_metadata(std::vector<TraceEvent>& out, TraceEvent e) {
    if (!out.empty()) {
        TraceEvent& last = out.back();
        if (last.cls == e.cls && last.dir == e.dir && last.cycle == e.cycle &&
            last.address + last.bytes == e.address &&
            last.bytes + e.bytes <= kMaxCoalescedBytes) {
            last.bytes += e.bytes;
            return;
        }
    }
    out.push_back(e);
}

}  // namespace

std::string_view to_string(SchemeKind kind) {
    switch (kind) {
    case SchemeKind::Unprotected: return "unprotected";
    case SchemeKind::SgxLike: return "sgx";
    case SchemeKind::MgxLike: return "mgx";
    case SchemeKind::Seda: return "seda";
    }
    return "unprotected";
}

std::string SchemeConfig::label() const {
    switch (kind) {
    case SchemeKind::Unprotected:
    case SchemeKind::Seda: return std::string(to_string(kind));
    default: return fmt::format("{}_{}", to_string(kind), protection_block_bytes);
    }
}

void SchemeConfig::validate() const {
    if (protection_block_bytes == 0 || protection_block_bytes % 64 != 0)
        throw Error(ErrorCode::InvalidConfig, "protection block must be a multiple of 64 B");
    if (protected_memory_bytes == 0 || protected_memory_bytes % protection_block_bytes != 0)
        throw Error(ErrorCode::InvalidConfig, "protected memory must hold whole blocks");
    if (vn_bits == 0 || vn_bits > 64)
        throw Error(ErrorCode::InvalidConfig, "VN width must be in [1, 64]");
}

SchemeConfig scheme_from_label(std::string_view label) {
    SchemeConfig c;
    if (label == "unprotected") {
        c.kind = SchemeKind::Unprotected;
    } else if (label == "seda") {
        c.kind = SchemeKind::Seda;
    } else if (label == "sgx_64" || label == "sgx_512" || label == "mgx_64" ||
               label == "mgx_512") {
        c.kind = label.starts_with("sgx") ? SchemeKind::SgxLike : SchemeKind::MgxLike;
        c.protection_block_bytes = label.ends_with("_512") ? 512 : 64;
    } else {
        throw Error(ErrorCode::InvalidConfig, fmt::format("unknown scheme '{}'", label));
    }
    return c;
}

void SchemeStats::add(const TraceEvent& e) {
    bytes[static_cast<std::size_t>(e.cls)][static_cast<std::size_t>(e.dir)] += e.bytes;
    ++total_events;
}

SchemeStats stats_of(std::span<const TraceEvent> events) {
    SchemeStats s;
    for (const auto& e : events) s.add(e);
    return s;
}

MetadataLayout metadata_layout(const SchemeConfig& config) {
    MetadataLayout m;
    const std::uint64_t blocks = config.protected_memory_bytes / config.protection_block_bytes;
    const std::uint64_t vn_lines = (blocks + config.tree_arity - 1) / config.tree_arity;
    m.vn_base = align_up(config.protected_memory_bytes, kRegionAlignment);
    m.mac_base = align_up(m.vn_base + vn_lines * config.cache_line_bytes, kRegionAlignment);
    m.tree_base = align_up(m.mac_base + blocks * integrity::kMacBytes, kRegionAlignment);
    // Tree levels shrink geometrically; a VN-region-sized window always fits them.
    m.layer_mac_base =
        align_up(m.tree_base + vn_lines * config.cache_line_bytes, kRegionAlignment);
    return m;
}

ProtectionEngine::ProtectionEngine(const SchemeConfig& config)
    : config_(config), layout_(metadata_layout(config)) {
    config_.validate();
    if (config_.kind == SchemeKind::SgxLike) {
        tree_.emplace(config_.protected_memory_bytes, config_.protection_block_bytes,
                      config_.tree_arity, layout_.vn_base, layout_.tree_base,
                      config_.cache_line_bytes);
        vn_cache_.emplace(CacheConfig{config_.vn_cache_bytes, config_.cache_line_bytes,
                                      config_.cache_line_bytes, config_.cache_ways});
    }
    if (config_.kind == SchemeKind::SgxLike || config_.kind == SchemeKind::MgxLike)
        mac_cache_.emplace(CacheConfig{config_.mac_cache_bytes, config_.cache_line_bytes,
                                       static_cast<std::uint32_t>(integrity::kMacBytes),
                                       config_.cache_ways});
}

std::uint64_t ProtectionEngine::version(std::uint64_t block) const {
    const auto it = versions_.find(block);
    return it == versions_.end() ? 0 : it->second;
}

void ProtectionEngine::handle_mac_writeback(const std::optional<Writeback>& wb,
                                            std::uint64_t cycle, std::vector<TraceEvent>& out) {
    if (wb) push_metadata(out, {cycle, wb->address, wb->bytes, Direction::Write, EventClass::Mac});
}

void ProtectionEngine::handle_vn_writeback(const std::optional<Writeback>& wb,
                                           std::uint64_t cycle, std::vector<TraceEvent>& out) {
    if (!wb) return;
    const auto node = tree_->locate(wb->line_address);
    if (!node) throw Error(ErrorCode::InvalidConfig, "VN cache evicted an unmapped line");
    push_metadata(out, {cycle, wb->address, wb->bytes, Direction::Write,
                        node->level == 1 ? EventClass::Vn : EventClass::TreeNode});
    // The parent digest must absorb the new child value.
    if (!tree_->is_root(node->level + 1))
        pending_parent_updates_.push_back({node->level + 1, node->index / tree_->arity()});
}

void ProtectionEngine::touch_node(std::uint32_t level, std::uint64_t index, bool write,
                                  std::uint64_t cycle, std::vector<TraceEvent>& out) {
    const std::uint64_t addr = tree_->node_address(level, index);
    const CacheAccess res = write ? vn_cache_->write(addr, true) : vn_cache_->read(addr);
    handle_vn_writeback(res.writeback, cycle, out);
    if (res.hit) return;
    push_metadata(out, {cycle, res.fill_address, res.fill_bytes, Direction::Read,
                        level == 1 ? EventClass::Vn : EventClass::TreeNode});
    // Verify the fetched node against its ancestors, stopping at the first
    // one already on chip (cached nodes are trusted; the root always is).
    std::uint64_t idx = index;
    for (std::uint32_t l = level + 1; !tree_->is_root(l); ++l) {
        idx /= tree_->arity();
        const std::uint64_t a = tree_->node_address(l, idx);
        const CacheAccess up = vn_cache_->read(a);
        handle_vn_writeback(up.writeback, cycle, out);
        if (up.hit) break;
        push_metadata(out, {cycle, up.fill_address, up.fill_bytes, Direction::Read,
                            EventClass::TreeNode});
    }
}

void ProtectionEngine::drain_pending(std::uint64_t cycle, std::vector<TraceEvent>& out) {
    while (!pending_parent_updates_.empty()) {
        const BonsaiTree::NodeId node = pending_parent_updates_.back();
        pending_parent_updates_.pop_back();
        touch_node(node.level, node.index, true, cycle, out);
    }
}

void ProtectionEngine::block_access(std::uint64_t block, Direction dir, std::uint64_t cycle,
                                    std::vector<TraceEvent>& out) {
    const bool write = dir == Direction::Write;
    if (config_.kind == SchemeKind::SgxLike) {
        touch_node(1, tree_->node_index(1, block), write, cycle, out);
        if (write) {
            std::uint64_t& vn = versions_[block];
            cipher::CounterBlock ctr(block * config_.protection_block_bytes, vn, config_.vn_bits);
            vn = ctr.next_version().vn();
        }
        drain_pending(cycle, out);
    }
    const std::uint64_t mac_addr = layout_.mac_base + block * integrity::kMacBytes;
    // A fresh MAC overwrites its whole sector, so writes never fetch it.
    const CacheAccess res = write ? mac_cache_->write(mac_addr, false) : mac_cache_->read(mac_addr);
    handle_mac_writeback(res.writeback, cycle, out);
    if (!res.hit && res.fill_bytes)
        push_metadata(out, {cycle, res.fill_address, res.fill_bytes, Direction::Read,
                            EventClass::Mac});
}

std::vector<TraceEvent> ProtectionEngine::access(const TraceEvent& e) {
    std::vector<TraceEvent> out;
    if (config_.kind != SchemeKind::SgxLike && config_.kind != SchemeKind::MgxLike) return out;
    const std::uint64_t bb = config_.protection_block_bytes;
    const std::uint64_t first = e.address / bb;
    const std::uint64_t last = (e.address + e.bytes - 1) / bb;
    for (std::uint64_t b = first; b <= last; ++b) block_access(b, e.dir, e.cycle, out);
    return out;
}

std::vector<TraceEvent> ProtectionEngine::enter_layer(std::size_t ordinal, std::uint64_t cycle) {
    if (config_.kind != SchemeKind::Seda ||
        config_.layer_mac_residency == LayerMacResidency::OnChip)
        return {};
    // Layer MAC of the incoming feature map (slot `ordinal`, written by the
    // previous layer; slot 0 is provisioned with the input).
    return {{cycle, layout_.layer_mac_base + ordinal * integrity::kMacBytes,
             static_cast<std::uint32_t>(integrity::kMacBytes), Direction::Read, EventClass::Mac}};
}

std::vector<TraceEvent> ProtectionEngine::leave_layer(std::size_t ordinal, std::uint64_t cycle) {
    if (config_.kind != SchemeKind::Seda ||
        config_.layer_mac_residency == LayerMacResidency::OnChip)
        return {};
    return {{cycle, layout_.layer_mac_base + (ordinal + 1) * integrity::kMacBytes,
             static_cast<std::uint32_t>(integrity::kMacBytes), Direction::Write,
             EventClass::Mac}};
}

std::vector<TraceEvent> ProtectionEngine::finish(std::uint64_t cycle) {
    std::vector<TraceEvent> out;
    if (mac_cache_)
        for (const auto& wb : mac_cache_->flush()) handle_mac_writeback(wb, cycle, out);
    if (vn_cache_) {
        // Each pass may dirty parents; repeat until the tree is clean.
        for (;;) {
            const auto wbs = vn_cache_->flush();
            if (wbs.empty()) break;
            for (const auto& wb : wbs) handle_vn_writeback(wb, cycle, out);
            drain_pending(cycle, out);
        }
    }
    return out;
}

AugmentedTrace process_trace(const SchemeConfig& config, std::span<const TraceEvent> data_trace,
                             std::span<const workload::LayerSpan> layers) {
    ProtectionEngine engine(config);
    for (std::size_t i = 0; i < data_trace.size(); ++i) {
        const TraceEvent& e = data_trace[i];
        if (e.cls != EventClass::Data)
            throw Error(ErrorCode::NonDataEvent, fmt::format("event {} is not data-class", i));
        if (e.bytes == 0 || e.address % workload::kTraceAlignment != 0)
            throw Error(ErrorCode::UnalignedDataEvent,
                        fmt::format("event {} at 0x{:x} is not 64 B aligned", i, e.address));
        if (e.address + e.bytes > config.protected_memory_bytes)
            throw Error(ErrorCode::InvalidConfig,
                        fmt::format("event {} lies outside protected memory", i));
    }

    const bool seda = config.kind == SchemeKind::Seda;
    if (seda) {
        std::size_t expect = 0;
        for (const auto& span : layers) {
            if (span.begin != expect || span.end < span.begin)
                throw Error(ErrorCode::MissingLayerContext, "layer spans must tile the trace");
            expect = span.end;
        }
        if (expect != data_trace.size() || (layers.empty() && !data_trace.empty()))
            throw Error(ErrorCode::MissingLayerContext,
                        "SeDA needs layer attribution for every event");
    }

    AugmentedTrace result;
    result.events.reserve(data_trace.size() * 2);
    std::size_t layer_ordinal = 0;
    for (std::size_t i = 0; i < data_trace.size(); ++i) {
        const TraceEvent& e = data_trace[i];
        if (seda) {
            while (layer_ordinal < layers.size() && layers[layer_ordinal].begin == layers[layer_ordinal].end)
                ++layer_ordinal;
            if (layers[layer_ordinal].begin == i) {
                for (const auto& m : engine.enter_layer(layer_ordinal, e.cycle)) {
                    if (config.layer_verify == LayerVerifyMode::Stall)
                        result.barriers.push_back(result.events.size());
                    result.events.push_back(m);
                }
            }
        }
        result.events.push_back(e);
        for (const auto& m : engine.access(e)) push_metadata(result.events, m);
        if (seda && layers[layer_ordinal].end == i + 1) {
            for (const auto& m : engine.leave_layer(layer_ordinal, e.cycle))
                result.events.push_back(m);
            ++layer_ordinal;
        }
    }
    const std::uint64_t last_cycle = data_trace.empty() ? 0 : data_trace.back().cycle;
    for (const auto& m : engine.finish(last_cycle)) push_metadata(result.events, m);

    result.stats = stats_of(result.events);
    if (engine.vn_cache()) result.vn_cache = engine.vn_cache()->counters();
    if (engine.mac_cache()) result.mac_cache = engine.mac_cache()->counters();
    return result;
}

std::string stats_csv_header() {
    return "workload,scheme,granularity,data_read,data_write,vn_read,vn_write,mac_read,mac_write,"
           "tree_read,tree_write,total_events";
}

std::string stats_csv_row(std::string_view workload, const SchemeConfig& config,
                          const SchemeStats& s) {
    auto b = [&](EventClass c, Direction d) {
        return s.bytes[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)];
    };
    return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}", workload, config.label(),
                       config.protection_block_bytes, b(EventClass::Data, Direction::Read),
                       b(EventClass::Data, Direction::Write), b(EventClass::Vn, Direction::Read),
                       b(EventClass::Vn, Direction::Write), b(EventClass::Mac, Direction::Read),
                       b(EventClass::Mac, Direction::Write),
                       b(EventClass::TreeNode, Direction::Read),
                       b(EventClass::TreeNode, Direction::Write), s.total_events);
}

}  // namespace seda::schemes
