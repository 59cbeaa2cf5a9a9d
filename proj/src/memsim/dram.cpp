#include "seda/memsim.hpp"

#include "seda/common.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace seda::memsim {

void DramConfig::validate() const {
    if (channels == 0) throw Error(ErrorCode::InvalidConfig, "DRAM needs at least one channel");
    if (!(gbps_per_channel > 0) || !(accel_freq_ghz > 0) || !(access_latency_ns >= 0))
        throw Error(ErrorCode::InvalidConfig, "DRAM rates must be positive");
    if (interleave_bytes == 0 || interleave_bytes % 64 != 0)
        throw Error(ErrorCode::InvalidConfig, "interleave must be a multiple of 64 B");
}

DramConfig dram_config_for(const workload::NpuConfig& npu) {
    DramConfig c;
    c.channels = npu.dram_channels;
    c.gbps_per_channel = npu.dram_gbps_per_channel;
    c.accel_freq_ghz = npu.freq_ghz;
    return c;
}

CycleReport simulate(const DramConfig& config, std::span<const TraceEvent> trace,
                     std::uint64_t compute_end_cycle, std::span<const std::size_t> barriers,
                     std::string workload) {
    config.validate();
    CycleReport r;
    r.workload = std::move(workload);
    r.channel_busy_cycles.assign(config.channels, 0.0);
    r.channel_bytes.assign(config.channels, 0);

    const double bw = config.bytes_per_cycle();
    const double latency = config.latency_cycles();
    std::vector<double> channel_free(config.channels, 0.0);
    double floor = 0.0;
    double finish = 0.0;
    std::size_t next_barrier = 0;

    for (std::size_t i = 0; i < trace.size(); ++i) {
        const TraceEvent& e = trace[i];
        (e.cls == workload::EventClass::Data ? r.data_bytes : r.metadata_bytes) += e.bytes;
        const double issue = std::max(static_cast<double>(e.cycle), floor);
        double event_done = issue;
        std::uint64_t addr = e.address;
        std::uint64_t remaining = e.bytes;
        while (remaining > 0) {
            const std::uint64_t chunk_end = (addr / config.interleave_bytes + 1) * config.interleave_bytes;
            const std::uint64_t n = std::min(remaining, chunk_end - addr);
            const auto ch = static_cast<std::size_t>((addr / config.interleave_bytes) % config.channels);
            const double transfer = static_cast<double>(n) / bw;
            const double start = std::max(issue, channel_free[ch]);
            channel_free[ch] = start + transfer;
            r.channel_busy_cycles[ch] += transfer;
            r.channel_bytes[ch] += n;
            event_done = std::max(event_done, start + transfer + latency);
            addr += n;
            remaining -= n;
        }
        finish = std::max(finish, event_done);
        while (next_barrier < barriers.size() && barriers[next_barrier] < i) ++next_barrier;
        if (next_barrier < barriers.size() && barriers[next_barrier] == i) {
            floor = std::max(floor, event_done);
            ++next_barrier;
        }
    }
    const double end = std::max(finish, static_cast<double>(compute_end_cycle));
    r.total_cycles = static_cast<std::uint64_t>(std::ceil(end));
    return r;
}

CycleReport normalize(const CycleReport& report, const CycleReport& baseline) {
    if (report.workload != baseline.workload || report.data_bytes != baseline.data_bytes)
        throw Error(ErrorCode::MismatchedWorkload,
                    fmt::format("cannot normalize '{}' against '{}'", report.workload,
                                baseline.workload));
    CycleReport out = report;
    if (baseline.total_cycles == 0)
        out.normalized_runtime = report.total_cycles == 0 ? 1.0 : 0.0;
    else
        out.normalized_runtime = static_cast<double>(report.total_cycles) /
                                 static_cast<double>(baseline.total_cycles);
    return out;
}

}  // namespace seda::memsim
