#include "seda/workload.hpp"

#include "seda/common.hpp"

#include <algorithm>

namespace seda::workload {
namespace {

// Tensors start on a 512 B boundary so every optBlk candidate tiles them
// from offset zero.
constexpr std::uint64_t kTensorAlignment = 512;

constexpr std::uint64_t align_up(std::uint64_t v, std::uint64_t a) { return (v + a - 1) / a * a; }
constexpr std::uint64_t align_down(std::uint64_t v, std::uint64_t a) { return v / a * a; }

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

}  // namespace

std::string_view to_string(Direction dir) { return dir == Direction::Read ? "read" : "write"; }

std::string_view to_string(EventClass cls) {
    switch (cls) {
    case EventClass::Data: return "data";
    case EventClass::Vn: return "vn";
    case EventClass::Mac: return "mac";
    case EventClass::TreeNode: return "tree_node";
    }
    return "data";
}

LayerLayout layout_layer(const TilingPlan& plan, std::uint64_t base) {
    LayerLayout l;
    l.ifmap_base = align_up(base, kTensorAlignment);
    l.filter_base = align_up(l.ifmap_base + plan.ifmap_bytes(), kTensorAlignment);
    l.ofmap_base = align_up(l.filter_base + plan.filter_bytes(), kTensorAlignment);
    l.end = align_up(l.ofmap_base + plan.ofmap_bytes(), kTensorAlignment);
    return l;
}

std::vector<TraceEvent> emit_trace(const TilingPlan& plan, const LayerLayout& layout,
                                   const NpuConfig& npu, std::uint64_t start_cycle,
                                   std::uint64_t* end_cycle) {
    const std::uint64_t pes = std::uint64_t{npu.pe_rows} * npu.pe_cols;
    const auto& L = plan.layer;
    const std::uint64_t eb = plan.element_bytes;
    const auto rows = plan.row_tiles();
    const auto cols = plan.col_tiles();
    const auto ks = plan.k_tiles();

    std::vector<TraceEvent> events;
    events.reserve(ks.size() * rows.size() * cols.size() * 2 + ks.size());

    // Double buffering: tile t's operands are fetched while tile t-1 computes,
    // and tile t's outputs spill when it finishes.
    std::uint64_t compute_start = start_cycle;
    std::uint64_t prev_start = start_cycle;
    for (const auto& k : ks) {
        bool first_spatial = true;
        for (const auto& r : rows) {
            for (const auto& c : cols) {
                const std::uint64_t issue = prev_start;
                if (first_spatial) {
                    const std::uint64_t off = std::uint64_t{k.begin} * L.R * L.S *
                                              L.filter_channels() * eb;
                    events.push_back({issue, layout.filter_base + align_down(off, kTraceAlignment),
                                      static_cast<std::uint32_t>(plan.filter_tile_bytes(k)),
                                      Direction::Read, EventClass::Data});
                    first_spatial = false;
                }
                const Range in_r = plan.input_rows(r);
                const Range in_c = plan.input_cols(c);
                const std::uint64_t in_off =
                    (std::uint64_t{in_r.begin} * L.W + in_c.begin) * L.C * eb;
                events.push_back({issue, layout.ifmap_base + align_down(in_off, kTraceAlignment),
                                  static_cast<std::uint32_t>(plan.ifmap_tile_bytes(r, c)),
                                  Direction::Read, EventClass::Data});

                const std::uint64_t compute = std::max<std::uint64_t>(
                    1, ceil_div(plan.tile_macs(r, c, k), pes));
                const std::uint64_t done = compute_start + compute;
                const std::uint64_t out_off =
                    ((std::uint64_t{r.begin} * L.out_cols() + c.begin) * L.K + k.begin) * eb;
                events.push_back({done, layout.ofmap_base + align_down(out_off, kTraceAlignment),
                                  static_cast<std::uint32_t>(plan.ofmap_tile_bytes(r, c, k)),
                                  Direction::Write, EventClass::Data});
                prev_start = compute_start;
                compute_start = done;
            }
        }
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const TraceEvent& a, const TraceEvent& b) { return a.cycle < b.cycle; });
    if (end_cycle) *end_cycle = compute_start;
    return events;
}

WorkloadTrace emit_model_trace(const ModelDescriptor& model, const NpuConfig& npu) {
    WorkloadTrace trace;
    trace.workload = model.name;
    std::uint64_t base = 0;
    std::uint64_t cycle = 0;
    for (const auto& layer : model.layers) {
        const TilingPlan plan = build_tiling_plan(layer, npu);
        const LayerLayout layout = layout_layer(plan, base);
        std::uint64_t end = cycle;
        auto events = emit_trace(plan, layout, npu, cycle, &end);
        LayerSpan span{layer.layer_id, trace.events.size(), trace.events.size() + events.size()};
        trace.events.insert(trace.events.end(), events.begin(), events.end());
        trace.layers.push_back(span);
        base = layout.end;
        cycle = end;
    }
    trace.compute_end_cycle = cycle;
    return trace;
}

}  // namespace seda::workload
