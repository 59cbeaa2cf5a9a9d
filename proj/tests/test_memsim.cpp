#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "seda/common.hpp"
#include "seda/memsim.hpp"

#include <cmath>
#include <numeric>

using namespace seda;
using namespace seda::memsim;
using workload::Direction;
using workload::EventClass;

namespace {

TraceEvent data(std::uint64_t cycle, std::uint64_t addr, std::uint32_t bytes) {
    return {cycle, addr, bytes, Direction::Read, EventClass::Data};
}
TraceEvent mac(std::uint64_t cycle, std::uint64_t addr, std::uint32_t bytes) {
    return {cycle, addr, bytes, Direction::Read, EventClass::Mac};
}

std::vector<TraceEvent> random_trace(Rng& rng, std::size_t n) {
    std::vector<TraceEvent> t;
    std::uint64_t cycle = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cycle += rng.below(40);
        t.push_back(data(cycle, rng.below(1u << 16) * 64, static_cast<std::uint32_t>(8 + rng.below(600))));
    }
    return t;
}

}  // namespace

TEST_CASE("config") {
    const auto s = dram_config_for(workload::server_npu());
    CHECK(s.channels == 4);
    CHECK(s.bytes_per_cycle() == 5.0);
    CHECK(s.latency_cycles() == 30.0);
    const auto e = dram_config_for(workload::edge_npu());
    CHECK(e.bytes_per_cycle() == doctest::Approx(2.5 / 2.75));
    DramConfig bad;
    bad.channels = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = DramConfig{};
    bad.gbps_per_channel = -1;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("single event closed form") {
    for (double gbps : {5.0, 2.5, 8.0}) {
        DramConfig c;
        c.gbps_per_channel = gbps;
        const double b = c.bytes_per_cycle();
        const auto r = simulate(c, std::vector{data(0, 0, 64)});
        CHECK(r.total_cycles == 30 + static_cast<std::uint64_t>(std::ceil(64 / b)));
    }
    CHECK(simulate(DramConfig{}, std::vector<TraceEvent>{}).total_cycles == 0);
    CHECK(simulate(DramConfig{}, std::vector<TraceEvent>{}, 77).total_cycles == 77);
}

TEST_CASE("evenly striped burst runs at the per-channel serial time") {
    DramConfig c;
    c.gbps_per_channel = 4.0;  // 64 B takes 16 cycles
    for (std::size_t n : {4u, 64u, 1000u}) {
        std::vector<TraceEvent> t;
        for (std::size_t i = 0; i < n; ++i) t.push_back(data(0, i * 64, 64));
        const auto r = simulate(c, t);
        const double serial = std::ceil(n / 4.0) * 16;
        CHECK(r.total_cycles == static_cast<std::uint64_t>(serial + 30));
        for (auto busy : r.channel_busy_cycles) CHECK(busy <= serial);
    }
}

TEST_CASE("large events interleave across channels") {
    const auto r = simulate(DramConfig{}, std::vector{data(0, 0, 4096)});
    for (auto bytes : r.channel_bytes) CHECK(bytes == 1024);
    const auto unaligned = simulate(DramConfig{}, std::vector{data(0, 32, 64)});
    CHECK(unaligned.channel_bytes[0] == 32);
    CHECK(unaligned.channel_bytes[1] == 32);
}

TEST_CASE("work conservation and busy bound") {
    Rng rng(4);
    for (int rep = 0; rep < 20; ++rep) {
        DramConfig c;
        c.channels = 1 + static_cast<std::uint32_t>(rng.below(8));
        c.gbps_per_channel = 1.0 + rng.below(16);
        const auto t = random_trace(rng, 500);
        const auto r = simulate(c, t, rng.below(5000));
        const std::uint64_t bytes = std::accumulate(r.channel_bytes.begin(), r.channel_bytes.end(), std::uint64_t{0});
        std::uint64_t trace_bytes = 0;
        for (const auto& e : t) trace_bytes += e.bytes;
        CHECK(bytes == trace_bytes);
        CHECK(r.data_bytes == trace_bytes);
        for (std::size_t ch = 0; ch < c.channels; ++ch) {
            CHECK(r.channel_busy_cycles[ch] ==
                  doctest::Approx(static_cast<double>(r.channel_bytes[ch]) / c.bytes_per_cycle()).epsilon(1e-12));
            CHECK(r.channel_busy_cycles[ch] <= static_cast<double>(r.total_cycles));
        }
    }
}

TEST_CASE("monotonicity: extra events never speed things up") {
    Rng rng(9);
    for (int rep = 0; rep < 50; ++rep) {
        auto t = random_trace(rng, 200);
        const auto before = simulate(DramConfig{}, t, 100).total_cycles;
        for (int k = 0; k < 10; ++k) {
            const std::size_t at = rng.below(t.size() + 1);
            const std::uint64_t cycle = at == 0 ? 0 : t[at - 1].cycle;
            t.insert(t.begin() + static_cast<std::ptrdiff_t>(at), mac(cycle, 1ull << 34, 8 + 8 * rng.below(8)));
        }
        CHECK(simulate(DramConfig{}, t, 100).total_cycles >= before);
    }
}

TEST_CASE("normalization") {
    std::vector<TraceEvent> base;
    for (int i = 0; i < 4000; ++i) base.push_back(data(0, i * 64, 64));
    const auto b = simulate(DramConfig{}, base, 0, {}, "w");
    CHECK(normalize(b, b).normalized_runtime == 1.0);

    SUBCASE("bandwidth bound +12.5% bytes") {
        auto more = base;
        for (int i = 0; i < 500; ++i) more.push_back(mac(0, (1ull << 34) + i * 64, 64));
        const auto r = normalize(simulate(DramConfig{}, more, 0, {}, "w"), b);
        CHECK(r.normalized_runtime == doctest::Approx(1.125).epsilon(0.005));
    }
    SUBCASE("metadata hidden under compute") {
        auto more = base;
        for (int i = 0; i < 500; ++i) more.push_back(mac(0, (1ull << 34) + i * 64, 64));
        const auto slow = simulate(DramConfig{}, base, 1'000'000, {}, "w");
        const auto r = normalize(simulate(DramConfig{}, more, 1'000'000, {}, "w"), slow);
        CHECK(r.normalized_runtime == 1.0);
    }
    SUBCASE("mismatched workloads") {
        const auto other = simulate(DramConfig{}, base, 0, {}, "x");
        try {
            (void)normalize(other, b);
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::MismatchedWorkload);
        }
        auto fewer = base;
        fewer.pop_back();
        CHECK_THROWS_AS(normalize(simulate(DramConfig{}, fewer, 0, {}, "w"), b), Error);
    }
}

TEST_CASE("barriers hold back later events") {
    const std::vector<TraceEvent> t{mac(0, 0, 8), data(0, 64, 64)};
    const auto free_run = simulate(DramConfig{}, t);
    const std::size_t barrier[] = {0};
    const auto stalled = simulate(DramConfig{}, t, 0, barrier);
    // 8 B + latency must finish before the data read can start.
    CHECK(free_run.total_cycles == 30 + 13);
    CHECK(stalled.total_cycles == static_cast<std::uint64_t>(std::ceil(8 / 5.0 + 30 + 64 / 5.0 + 30)));
}
