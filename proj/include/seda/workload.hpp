#pragma once

// DNN layer descriptors, output-stationary tiling, DRAM trace generation and
// the per-layer authentication block (optBlk) search.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace seda::workload {

struct NpuConfig {
    std::string name = "custom";
    std::uint32_t pe_rows = 256;
    std::uint32_t pe_cols = 256;
    std::uint64_t sram_bytes = 24ull << 20;
    double freq_ghz = 1.0;
    std::uint32_t dram_channels = 4;
    double dram_gbps_per_channel = 5.0;
    std::uint32_t element_bytes = 1;

    void validate() const;
};

NpuConfig server_npu();
NpuConfig edge_npu();
/// "server" or "edge"; throws InvalidConfig otherwise.
NpuConfig npu_profile(std::string_view name);

/// `Other` is a depthwise convolution: one R x S filter per input channel,
/// so K must equal C.
enum class LayerKind { Conv, Fc, Other };

std::string_view to_string(LayerKind kind);

/// Input dims already include any zero padding; outputs follow valid-conv
/// arithmetic E = (H - R) / stride + 1.
struct LayerDescriptor {
    std::uint32_t layer_id = 0;
    LayerKind kind = LayerKind::Conv;
    std::uint32_t H = 1, W = 1, C = 1;
    std::uint32_t R = 1, S = 1, K = 1;
    std::uint32_t stride = 1;

    std::uint32_t out_rows() const noexcept { return (H - R) / stride + 1; }
    std::uint32_t out_cols() const noexcept { return (W - S) / stride + 1; }
    /// Input channels a single filter spans.
    std::uint32_t filter_channels() const noexcept { return kind == LayerKind::Other ? 1 : C; }

    std::uint64_t ifmap_elems() const noexcept { return std::uint64_t{H} * W * C; }
    std::uint64_t filter_elems() const noexcept {
        return std::uint64_t{R} * S * filter_channels() * K;
    }
    std::uint64_t ofmap_elems() const noexcept {
        return std::uint64_t{out_rows()} * out_cols() * K;
    }
    std::uint64_t macs() const noexcept {
        return std::uint64_t{out_rows()} * out_cols() * K * R * S * filter_channels();
    }

    void validate() const;
};

struct ModelDescriptor {
    std::string name;
    std::vector<LayerDescriptor> layers;
};

/// Half-open range [begin, end).
struct Range {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;

    std::uint32_t size() const noexcept { return end - begin; }
    friend bool operator==(const Range&, const Range&) = default;
};

/// Contiguous byte span within one tensor.
struct Span {
    std::uint64_t offset = 0;
    std::uint64_t bytes = 0;

    friend bool operator==(const Span&, const Span&) = default;
};

/// Output-stationary plan: K tiles outermost, then output row tiles, then
/// output column tiles. Every spatial tile re-reads its ifmap window.
struct TilingPlan {
    LayerDescriptor layer;
    std::uint32_t element_bytes = 1;
    std::uint32_t tile_out_rows = 1;
    std::uint32_t tile_out_cols = 1;
    std::uint32_t tile_k = 1;
    std::uint32_t overlap_rows = 0;
    std::uint32_t overlap_cols = 0;

    std::vector<Range> row_tiles() const;
    std::vector<Range> col_tiles() const;
    std::vector<Range> k_tiles() const;

    /// Input rows (or cols) an output range depends on.
    Range input_rows(const Range& out_rows) const;
    Range input_cols(const Range& out_cols) const;

    std::uint64_t ifmap_tile_bytes(const Range& rows, const Range& cols) const;
    std::uint64_t filter_tile_bytes(const Range& ks) const;
    std::uint64_t ofmap_tile_bytes(const Range& rows, const Range& cols, const Range& ks) const;
    std::uint64_t tile_macs(const Range& rows, const Range& cols, const Range& ks) const;

    /// HWC-layout byte spans of the ifmap window for one spatial tile.
    std::vector<Span> ifmap_spans(const Range& rows, const Range& cols) const;
    /// Every ifmap window read in traversal order (one entry per read).
    std::vector<std::vector<Span>> ifmap_reads() const;

    std::uint64_t ifmap_bytes() const noexcept { return layer.ifmap_elems() * element_bytes; }
    std::uint64_t filter_bytes() const noexcept { return layer.filter_elems() * element_bytes; }
    std::uint64_t ofmap_bytes() const noexcept { return layer.ofmap_elems() * element_bytes; }
};

TilingPlan build_tiling_plan(const LayerDescriptor& layer, const NpuConfig& npu);

enum class Direction : std::uint8_t { Read, Write };
enum class EventClass : std::uint8_t { Data, Vn, Mac, TreeNode };

std::string_view to_string(Direction dir);
std::string_view to_string(EventClass cls);

struct TraceEvent {
    std::uint64_t cycle = 0;
    std::uint64_t address = 0;
    std::uint32_t bytes = 0;
    Direction dir = Direction::Read;
    EventClass cls = EventClass::Data;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

inline constexpr std::uint64_t kTraceAlignment = 64;

/// Events [begin, end) of a trace belong to layer_id.
struct LayerSpan {
    std::uint32_t layer_id = 0;
    std::size_t begin = 0;
    std::size_t end = 0;

    friend bool operator==(const LayerSpan&, const LayerSpan&) = default;
};

struct WorkloadTrace {
    std::string workload;
    std::vector<TraceEvent> events;
    std::vector<LayerSpan> layers;
    /// Cycle at which the last tile finishes computing.
    std::uint64_t compute_end_cycle = 0;
};

/// Base addresses of one layer's tensors in the packed linear layout.
struct LayerLayout {
    std::uint64_t ifmap_base = 0;
    std::uint64_t filter_base = 0;
    std::uint64_t ofmap_base = 0;
    std::uint64_t end = 0;
};

LayerLayout layout_layer(const TilingPlan& plan, std::uint64_t base);

/// Events for one layer, issued on the compute timeline starting at
/// `start_cycle`. Returns the end-of-compute cycle through `end_cycle`.
std::vector<TraceEvent> emit_trace(const TilingPlan& plan, const LayerLayout& layout,
                                   const NpuConfig& npu, std::uint64_t start_cycle,
                                   std::uint64_t* end_cycle = nullptr);

/// Whole model: layers laid out back to back, events cycle-sorted.
WorkloadTrace emit_model_trace(const ModelDescriptor& model, const NpuConfig& npu);

inline constexpr std::uint32_t kOptBlkCandidates[] = {64, 128, 256, 512};

struct OptBlkChoice {
    std::uint32_t layer_id = 0;
    std::uint32_t block_bytes = 0;
    std::uint64_t score_bytes = 0;
    /// score(512 B) - score(chosen); zero when 512 B wins.
    std::int64_t redundant_mac_bytes = 0;
};

/// Hashed bytes plus 8 B per tag computation when every read in `reads`
/// verifies the blocks of size `block_bytes` it touches.
std::uint64_t hashing_cost(std::span<const std::vector<Span>> reads, std::uint32_t block_bytes);

/// Score of one candidate: layer i's ifmap windows plus layer i+1's reads of
/// the produced feature map.
std::uint64_t opt_blk_score(const TilingPlan& plan_i, const TilingPlan* plan_next,
                            std::uint32_t block_bytes);

OptBlkChoice select_opt_blk(const TilingPlan& plan_i, const TilingPlan* plan_next,
                            std::span<const std::uint32_t> candidates);

// Layer tables: CSV `layer_id,kind,H,W,C,R,S,K,stride`.
ModelDescriptor parse_layer_table(std::istream& in, std::string name);
ModelDescriptor load_layer_table(const std::filesystem::path& path);
ModelDescriptor load_model(const std::filesystem::path& model_dir, std::string_view name);

// Trace files: CSV `cycle,address_hex,bytes,dir,class`.
inline constexpr std::string_view kTraceHeader = "cycle,address_hex,bytes,dir,class";

void write_trace(std::ostream& out, std::span<const TraceEvent> events);
std::vector<TraceEvent> parse_trace(std::istream& in);
void save_trace_file(const std::filesystem::path& path, std::span<const TraceEvent> events);
std::vector<TraceEvent> load_trace_file(const std::filesystem::path& path);

}  // namespace seda::workload
