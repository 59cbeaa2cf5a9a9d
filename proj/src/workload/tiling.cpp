#include "seda/workload.hpp"

#include "seda/common.hpp"

#include <algorithm>
#include <string>

namespace seda::workload {

void NpuConfig::validate() const {
    if (pe_rows == 0 || pe_cols == 0 || sram_bytes == 0 || !(freq_ghz > 0) ||
        dram_channels == 0 || !(dram_gbps_per_channel > 0) || element_bytes == 0)
        throw Error(ErrorCode::InvalidConfig, "NPU '" + name + "' has a non-positive parameter");
}

NpuConfig server_npu() {
    return NpuConfig{"server", 256, 256, 24ull << 20, 1.0, 4, 5.0, 1};
}

NpuConfig edge_npu() {
    return NpuConfig{"edge", 32, 32, 480ull << 10, 2.75, 4, 2.5, 1};
}

NpuConfig npu_profile(std::string_view name) {
    if (name == "server") return server_npu();
    if (name == "edge") return edge_npu();
    throw Error(ErrorCode::InvalidConfig, "unknown NPU profile '" + std::string(name) + "'");
}

std::string_view to_string(LayerKind kind) {
    switch (kind) {
    case LayerKind::Conv: return "conv";
    case LayerKind::Fc: return "fc";
    case LayerKind::Other: return "other";
    }
    return "conv";
}

void LayerDescriptor::validate() const {
    const std::string where = "layer " + std::to_string(layer_id);
    if (H == 0 || W == 0 || C == 0 || R == 0 || S == 0 || K == 0 || stride == 0)
        throw Error(ErrorCode::InvalidLayer, where + ": dimensions must be positive");
    if (R > H || S > W)
        throw Error(ErrorCode::InvalidLayer, where + ": filter larger than input");
    if (kind == LayerKind::Fc && (H != 1 || W != 1 || R != 1 || S != 1))
        throw Error(ErrorCode::InvalidLayer, where + ": fc layers are 1x1 over a 1x1 input");
    if (kind == LayerKind::Other && K != C)
        throw Error(ErrorCode::InvalidLayer, where + ": depthwise layers need K == C");
}

namespace {

std::vector<Range> split(std::uint32_t extent, std::uint32_t tile) {
    std::vector<Range> out;
    for (std::uint32_t b = 0; b < extent; b += tile)
        out.push_back({b, std::min(extent, b + tile)});
    return out;
}

std::uint32_t halve(std::uint32_t v) { return (v + 1) / 2; }

}  // namespace

std::vector<Range> TilingPlan::row_tiles() const { return split(layer.out_rows(), tile_out_rows); }
std::vector<Range> TilingPlan::col_tiles() const { return split(layer.out_cols(), tile_out_cols); }
std::vector<Range> TilingPlan::k_tiles() const { return split(layer.K, tile_k); }

Range TilingPlan::input_rows(const Range& out) const {
    return {out.begin * layer.stride, (out.end - 1) * layer.stride + layer.R};
}

Range TilingPlan::input_cols(const Range& out) const {
    return {out.begin * layer.stride, (out.end - 1) * layer.stride + layer.S};
}

std::uint64_t TilingPlan::ifmap_tile_bytes(const Range& rows, const Range& cols) const {
    return std::uint64_t{input_rows(rows).size()} * input_cols(cols).size() * layer.C *
           element_bytes;
}

std::uint64_t TilingPlan::filter_tile_bytes(const Range& ks) const {
    return std::uint64_t{layer.R} * layer.S * layer.filter_channels() * ks.size() * element_bytes;
}

std::uint64_t TilingPlan::ofmap_tile_bytes(const Range& rows, const Range& cols,
                                           const Range& ks) const {
    return std::uint64_t{rows.size()} * cols.size() * ks.size() * element_bytes;
}

std::uint64_t TilingPlan::tile_macs(const Range& rows, const Range& cols, const Range& ks) const {
    return std::uint64_t{rows.size()} * cols.size() * ks.size() * layer.R * layer.S *
           layer.filter_channels();
}

std::vector<Span> TilingPlan::ifmap_spans(const Range& rows, const Range& cols) const {
    const Range in_r = input_rows(rows);
    const Range in_c = input_cols(cols);
    const std::uint64_t pixel = std::uint64_t{layer.C} * element_bytes;
    std::vector<Span> spans;
    for (std::uint32_t r = in_r.begin; r < in_r.end; ++r) {
        const Span s{(std::uint64_t{r} * layer.W + in_c.begin) * pixel, in_c.size() * pixel};
        if (!spans.empty() && spans.back().offset + spans.back().bytes == s.offset)
            spans.back().bytes += s.bytes;
        else
            spans.push_back(s);
    }
    return spans;
}

std::vector<std::vector<Span>> TilingPlan::ifmap_reads() const {
    std::vector<std::vector<Span>> reads;
    const auto rows = row_tiles();
    const auto cols = col_tiles();
    const std::size_t n_k = k_tiles().size();
    reads.reserve(n_k * rows.size() * cols.size());
    for (std::size_t k = 0; k < n_k; ++k)
        for (const auto& r : rows)
            for (const auto& c : cols)
                reads.push_back(ifmap_spans(r, c));
    return reads;
}

TilingPlan build_tiling_plan(const LayerDescriptor& layer, const NpuConfig& npu) {
    layer.validate();
    npu.validate();

    TilingPlan plan;
    plan.layer = layer;
    plan.element_bytes = npu.element_bytes;
    plan.tile_out_rows = layer.out_rows();
    plan.tile_out_cols = layer.out_cols();
    plan.tile_k = layer.K;
    plan.overlap_rows = layer.R > layer.stride ? layer.R - layer.stride : 0;
    plan.overlap_cols = layer.S > layer.stride ? layer.S - layer.stride : 0;

    const bool depthwise = layer.kind == LayerKind::Other;
    auto footprint = [&] {
        const Range rows{0, plan.tile_out_rows};
        const Range cols{0, plan.tile_out_cols};
        const Range ks{0, plan.tile_k};
        return plan.ifmap_tile_bytes(rows, cols) + plan.filter_tile_bytes(ks) +
               plan.ofmap_tile_bytes(rows, cols, ks);
    };

    // Greedy shrink: keep the filter tile within half of SRAM, then halve the
    // larger spatial dimension, then fall back to fewer filters.
    while (footprint() > npu.sram_bytes) {
        const bool filters_heavy = plan.filter_tile_bytes({0, plan.tile_k}) > npu.sram_bytes / 2;
        if (!depthwise && filters_heavy && plan.tile_k > 1) {
            plan.tile_k = halve(plan.tile_k);
        } else if (plan.tile_out_rows >= plan.tile_out_cols && plan.tile_out_rows > 1) {
            plan.tile_out_rows = halve(plan.tile_out_rows);
        } else if (plan.tile_out_cols > 1) {
            plan.tile_out_cols = halve(plan.tile_out_cols);
        } else if (!depthwise && plan.tile_k > 1) {
            plan.tile_k = halve(plan.tile_k);
        } else {
            throw Error(ErrorCode::LayerTooLargeForSram,
                        "layer " + std::to_string(layer.layer_id) + " needs " +
                            std::to_string(footprint()) + " bytes for a 1x1 output tile, SRAM has " +
                            std::to_string(npu.sram_bytes));
        }
    }
    return plan;
}

}  // namespace seda::workload
