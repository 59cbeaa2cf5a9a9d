#pragma once

// Fixed-latency, address-interleaved multi-channel DRAM timing model.
// All times are accelerator cycles.

#include "seda/workload.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace seda::memsim {

using workload::TraceEvent;

struct DramConfig {
    std::uint32_t channels = 4;
    double gbps_per_channel = 5.0;
    double access_latency_ns = 30.0;
    std::uint32_t interleave_bytes = 64;
    double accel_freq_ghz = 1.0;

    void validate() const;
    /// Bytes one channel moves per accelerator cycle.
    double bytes_per_cycle() const { return gbps_per_channel / accel_freq_ghz; }
    double latency_cycles() const { return access_latency_ns * accel_freq_ghz; }
};

DramConfig dram_config_for(const workload::NpuConfig& npu);

struct CycleReport {
    std::string workload;
    std::uint64_t total_cycles = 0;
    std::vector<double> channel_busy_cycles;
    std::vector<std::uint64_t> channel_bytes;
    std::uint64_t data_bytes = 0;
    std::uint64_t metadata_bytes = 0;
    double normalized_runtime = 1.0;
};

/// Replays `trace` in order. An event split into interleave chunks occupies
/// each chunk's channel for its transfer time; the access latency is
/// pipelined. No chunk starts before its issue cycle, its channel's previous
/// transfer, or the completion of any earlier event listed in `barriers`.
CycleReport simulate(const DramConfig& config, std::span<const TraceEvent> trace,
                     std::uint64_t compute_end_cycle = 0,
                     std::span<const std::size_t> barriers = {}, std::string workload = {});

/// Sets normalized_runtime = total_cycles / baseline.total_cycles. Both
/// reports must name the same workload and carry the same data bytes.
CycleReport normalize(const CycleReport& report, const CycleReport& baseline);

}  // namespace seda::memsim
