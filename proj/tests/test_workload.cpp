#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "seda/integrity.hpp"
#include "seda/workload.hpp"
#include "support.hpp"

#include <set>
#include <sstream>

using namespace seda;
using namespace seda::workload;

namespace {

NpuConfig tiny_npu(std::uint64_t sram) {
    NpuConfig n = server_npu();
    n.name = "tiny";
    n.pe_rows = 4;
    n.pe_cols = 4;
    n.sram_bytes = sram;
    return n;
}

LayerDescriptor conv(std::uint32_t id, std::uint32_t h, std::uint32_t c, std::uint32_t r,
                     std::uint32_t k, std::uint32_t s) {
    return {id, LayerKind::Conv, h, h, c, r, r, k, s};
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Io;
}

// Rows of input a set of output tiles reads: s*E + tiles*(R - s).
std::uint64_t halo_rows(std::uint32_t e, std::uint32_t tiles, std::uint32_t r, std::uint32_t s) {
    return std::uint64_t{s} * e + std::uint64_t{tiles} * r - std::uint64_t{tiles} * s;
}

// Distinct input rows a layer reads at all (strided 1x1 layers skip some).
std::uint64_t touched(std::uint32_t e, std::uint32_t r, std::uint32_t s) {
    return r >= s ? std::uint64_t{e - 1} * s + r : std::uint64_t{e} * r;
}

std::uint64_t ifmap_event_bytes(const std::vector<TraceEvent>& events, const LayerLayout& l) {
    std::uint64_t sum = 0;
    for (const auto& e : events)
        if (e.address >= l.ifmap_base && e.address < l.filter_base) sum += e.bytes;
    return sum;
}

// Brute force: enumerate every byte each tile window reads, collect the
// blocks it touches, hash them for real and count what was hashed.
struct BruteForce {
    cipher::RoundKeySchedule sched = cipher::expand_key(cipher::AesKey{});

    std::uint64_t cost(const TilingPlan& p, std::uint32_t b, const std::vector<std::uint8_t>& data) {
        const auto& L = p.layer;
        const std::uint32_t E = L.out_rows(), F = L.out_cols();
        std::uint64_t hashed = 0;
        for (std::uint32_t k0 = 0; k0 < L.K; k0 += p.tile_k) {
            for (std::uint32_t r0 = 0; r0 < E; r0 += p.tile_out_rows) {
                for (std::uint32_t c0 = 0; c0 < F; c0 += p.tile_out_cols) {
                    const std::uint32_t r1 = std::min(E, r0 + p.tile_out_rows);
                    const std::uint32_t c1 = std::min(F, c0 + p.tile_out_cols);
                    std::set<std::uint64_t> blocks;
                    for (std::uint32_t y = r0 * L.stride; y < (r1 - 1) * L.stride + L.R; ++y)
                        for (std::uint32_t x = c0 * L.stride; x < (c1 - 1) * L.stride + L.S; ++x)
                            for (std::uint32_t ch = 0; ch < L.C * p.element_bytes; ++ch)
                                blocks.insert(((std::uint64_t{y} * L.W + x) * L.C * p.element_bytes + ch) / b);
                    for (auto blk : blocks) {
                        std::vector<std::uint8_t> msg(b, 0);
                        for (std::uint32_t i = 0; i < b && blk * b + i < data.size(); ++i)
                            msg[i] = data[blk * b + i];
                        (void)integrity::keyed_hash(sched, msg);
                        hashed += msg.size() + integrity::kMacBytes;
                    }
                }
            }
        }
        return hashed;
    }

    std::pair<std::uint32_t, std::uint64_t> choose(const TilingPlan& p, const TilingPlan* next) {
        std::uint32_t best = 0;
        std::uint64_t best_score = ~std::uint64_t{0};
        for (std::uint32_t b : kOptBlkCandidates) {
            std::uint64_t s = cost(p, b, synthetic(p));
            if (next) s += cost(*next, b, synthetic(*next));
            if (s < best_score || (s == best_score && b > best)) {
                best = b;
                best_score = s;
            }
        }
        return {best, best_score};
    }

    static std::vector<std::uint8_t> synthetic(const TilingPlan& p) {
        std::vector<std::uint8_t> v(p.ifmap_bytes());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<std::uint8_t>(i * 131 + 7);
        return v;
    }
};

}  // namespace

TEST_CASE("layer geometry") {
    const auto l = conv(0, 227, 3, 11, 96, 4);
    CHECK(l.out_rows() == 55);
    CHECK(l.macs() == 55ull * 55 * 96 * 11 * 11 * 3);
    const LayerDescriptor dw{1, LayerKind::Other, 16, 16, 512, 3, 3, 512, 1};
    CHECK(dw.filter_elems() == 9 * 512);
    CHECK(dw.macs() == 14ull * 14 * 512 * 9);

    CHECK(code_of([] { LayerDescriptor{2, LayerKind::Fc, 2, 2, 4, 1, 1, 4, 1}.validate(); }) ==
          ErrorCode::InvalidLayer);
    CHECK(code_of([] { LayerDescriptor{2, LayerKind::Other, 8, 8, 4, 3, 3, 8, 1}.validate(); }) ==
          ErrorCode::InvalidLayer);
    CHECK(code_of([] { conv(3, 4, 1, 5, 1, 1).validate(); }) == ErrorCode::InvalidLayer);
    CHECK(code_of([] { conv(3, 4, 1, 3, 1, 0).validate(); }) == ErrorCode::InvalidLayer);
}

TEST_CASE("tiling fits sram and covers the output") {
    for (std::uint64_t sram : {4096ull, 16384ull, 1ull << 20}) {
        const auto npu = tiny_npu(sram);
        for (const auto& l : {conv(0, 34, 16, 3, 32, 1), conv(1, 31, 8, 5, 64, 2),
                              LayerDescriptor{2, LayerKind::Other, 18, 18, 32, 3, 3, 32, 1}}) {
            const auto p = build_tiling_plan(l, npu);
            const Range rows{0, p.tile_out_rows}, cols{0, p.tile_out_cols}, ks{0, p.tile_k};
            CHECK(p.ifmap_tile_bytes(rows, cols) + p.filter_tile_bytes(ks) +
                      p.ofmap_tile_bytes(rows, cols, ks) <= sram);
            std::uint64_t macs = 0;
            for (const auto& k : p.k_tiles())
                for (const auto& r : p.row_tiles())
                    for (const auto& c : p.col_tiles()) macs += p.tile_macs(r, c, k);
            CHECK(macs == l.macs());
            CHECK(p.overlap_rows == (l.R > l.stride ? l.R - l.stride : 0));
            if (l.kind == LayerKind::Other) CHECK(p.tile_k == l.K);
        }
    }
    CHECK(code_of([] { build_tiling_plan(conv(0, 8, 64, 3, 8, 1), tiny_npu(256)); }) ==
          ErrorCode::LayerTooLargeForSram);
}

TEST_CASE("ifmap re-reads follow the halo closed form") {
    std::vector<std::pair<LayerDescriptor, NpuConfig>> cases;
    for (const auto& l : {conv(0, 34, 16, 3, 32, 1), conv(1, 31, 8, 5, 64, 2),
                          conv(2, 227, 3, 11, 96, 4), conv(3, 20, 4, 2, 4, 3)})
        for (std::uint64_t sram : {2048ull, 8192ull, 65536ull}) cases.emplace_back(l, tiny_npu(sram));
    for (const auto& m : {"lenet", "alexnet", "mobilenet", "resnet18"})
        for (const auto& l : load_model(test::model_dir(), m).layers)
            for (const auto& npu : {server_npu(), edge_npu()}) cases.emplace_back(l, npu);

    for (const auto& [l, npu] : cases) {
        const auto p = build_tiling_plan(l, npu);
        const LayerLayout layout = layout_layer(p, 0);
        const auto events = emit_trace(p, layout, npu, 0);
        const std::uint64_t rows = halo_rows(l.out_rows(), p.row_tiles().size(), l.R, l.stride);
        const std::uint64_t cols = halo_rows(l.out_cols(), p.col_tiles().size(), l.S, l.stride);
        const std::uint64_t expected = p.k_tiles().size() * rows * cols * l.C * p.element_bytes;
        INFO("layer " << l.layer_id << " on " << npu.name);
        CHECK(ifmap_event_bytes(events, layout) == expected);
    }
}

TEST_CASE("trace events") {
    const auto npu = tiny_npu(8192);
    const auto p = build_tiling_plan(conv(0, 34, 16, 3, 32, 1), npu);
    const auto layout = layout_layer(p, 100);
    CHECK(layout.ifmap_base % 512 == 0);
    CHECK(layout.filter_base >= layout.ifmap_base + p.ifmap_bytes());
    CHECK(layout.ofmap_base >= layout.filter_base + p.filter_bytes());
    std::uint64_t end = 0;
    const auto events = emit_trace(p, layout, npu, 1000, &end);
    CHECK(end > 1000);

    std::uint64_t filter = 0, ofmap = 0, data = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        CHECK(e.address % kTraceAlignment == 0);
        CHECK(e.cls == EventClass::Data);
        CHECK(e.cycle >= 1000);
        if (i) CHECK(e.cycle >= events[i - 1].cycle);
        data += e.bytes;
        if (e.address >= layout.ofmap_base) {
            CHECK(e.dir == Direction::Write);
            ofmap += e.bytes;
        } else if (e.address >= layout.filter_base) {
            filter += e.bytes;
        }
    }
    CHECK(filter == p.filter_bytes());
    CHECK(ofmap == p.ofmap_bytes());
    CHECK(data >= p.ifmap_bytes() + p.filter_bytes() + p.ofmap_bytes());
}

TEST_CASE("model trace lower bound and layer spans") {
    for (const auto& m : {"lenet", "alexnet", "mobilenet", "resnet18"}) {
        const auto model = load_model(test::model_dir(), m);
        for (const auto& npu : {server_npu(), edge_npu()}) {
            const auto t = emit_model_trace(model, npu);
            std::uint64_t tensors = 0;
            for (const auto& l : model.layers) {
                const auto p = build_tiling_plan(l, npu);
                tensors += touched(l.out_rows(), l.R, l.stride) * touched(l.out_cols(), l.S, l.stride) *
                               l.C * p.element_bytes +
                           p.filter_bytes() + p.ofmap_bytes();
            }
            std::uint64_t data = 0;
            for (const auto& e : t.events) data += e.bytes;
            CHECK(data >= tensors);
            REQUIRE(t.layers.size() == model.layers.size());
            CHECK(t.layers.front().begin == 0);
            CHECK(t.layers.back().end == t.events.size());
            for (std::size_t i = 1; i < t.layers.size(); ++i)
                CHECK(t.layers[i].begin == t.layers[i - 1].end);
            for (std::size_t i = 1; i < t.events.size(); ++i)
                REQUIRE(t.events[i].cycle >= t.events[i - 1].cycle);
            CHECK(t.compute_end_cycle >= t.events.back().cycle);
        }
    }
}

TEST_CASE("opt blk scoring") {
    SUBCASE("single candidate") {
        const auto p = build_tiling_plan(conv(0, 34, 16, 3, 32, 1), tiny_npu(4096));
        const std::uint32_t only[] = {128};
        CHECK(select_opt_blk(p, nullptr, only).block_bytes == 128);
        CHECK(select_opt_blk(p, nullptr, only).redundant_mac_bytes == 0);
        CHECK_THROWS_AS(select_opt_blk(p, nullptr, std::span<const std::uint32_t>{}), Error);
    }
    SUBCASE("untiled layer picks the largest block") {
        const auto p = build_tiling_plan(conv(0, 32, 16, 1, 16, 1), server_npu());
        CHECK(p.row_tiles().size() == 1);
        CHECK(select_opt_blk(p, nullptr, kOptBlkCandidates).block_bytes == 512);
    }
    SUBCASE("heavy halo overlap picks a smaller block") {
        const auto p = build_tiling_plan(conv(0, 66, 3, 3, 8, 1), tiny_npu(2048));
        CHECK(p.row_tiles().size() > 4);
        const auto c = select_opt_blk(p, nullptr, kOptBlkCandidates);
        CHECK(c.block_bytes < 512);
        CHECK(c.redundant_mac_bytes > 0);
        CHECK(c.score_bytes + c.redundant_mac_bytes == opt_blk_score(p, nullptr, 512));
    }
    SUBCASE("hashing cost hand count") {
        const std::vector<std::vector<Span>> reads{{{0, 64}, {100, 20}}, {{60, 8}}};
        // read 0: blocks 0 and 1 at 64 B; read 1: blocks 0 and 1.
        CHECK(hashing_cost(reads, 64) == 4 * (64 + 8));
        CHECK(hashing_cost(reads, 128) == 2 * (128 + 8));
    }
}

TEST_CASE("opt blk matches the brute-force oracle") {
    BruteForce oracle;
    std::vector<std::pair<std::string, NpuConfig>> configs{{"lenet", server_npu()},
                                                           {"lenet", edge_npu()},
                                                           {"lenet", tiny_npu(4096)},
                                                           {"alexnet", server_npu()},
                                                           {"alexnet", edge_npu()}};
    for (const auto& [name, npu] : configs) {
        const auto model = load_model(test::model_dir(), name);
        std::vector<TilingPlan> plans;
        for (const auto& l : model.layers) plans.push_back(build_tiling_plan(l, npu));
        for (std::size_t i = 0; i < plans.size(); ++i) {
            const TilingPlan* next = i + 1 < plans.size() ? &plans[i + 1] : nullptr;
            const auto got = select_opt_blk(plans[i], next, kOptBlkCandidates);
            const auto [blk, score] = oracle.choose(plans[i], next);
            INFO(name << " layer " << i << " on " << npu.name);
            CHECK(got.block_bytes == blk);
            CHECK(got.score_bytes == score);
        }
    }
}

TEST_CASE("trace file round trip and fixtures") {
    const auto t = emit_model_trace(load_model(test::model_dir(), "lenet"), edge_npu());
    std::stringstream ss;
    write_trace(ss, t.events);
    CHECK(parse_trace(ss) == t.events);

    const auto three = load_trace_file(test::fixture_dir() / "three_events.csv");
    REQUIRE(three.size() == 3);
    CHECK(three[0] == TraceEvent{0, 0, 64, Direction::Read, EventClass::Data});
    CHECK(three[1] == TraceEvent{17, 0x1f40, 512, Direction::Write, EventClass::Data});
    CHECK(three[2] == TraceEvent{17, 0xdeadbeef00, 8, Direction::Read, EventClass::Mac});
    std::stringstream out;
    write_trace(out, three);
    CHECK(out.str() ==
          "cycle,address_hex,bytes,dir,class\n0,0x0,64,read,data\n17,0x1f40,512,write,data\n"
          "17,0xdeadbeef00,8,read,mac\n");

    try {
        load_trace_file(test::fixture_dir() / "bad_row.csv");
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK(code_of([] { load_trace_file(test::fixture_dir() / "non_monotonic.csv"); }) ==
          ErrorCode::NonMonotonicCycle);
    CHECK(code_of([] { load_trace_file(test::fixture_dir() / "missing.csv"); }) == ErrorCode::Io);
}

TEST_CASE("layer tables") {
    std::istringstream good("layer_id,kind,H,W,C,R,S,K,stride\n# comment\n0,conv,8,8,3,3,3,4,1\n"
                            "1,fc,1,1,144,1,1,10,1\n");
    const auto m = parse_layer_table(good, "toy");
    REQUIRE(m.layers.size() == 2);
    CHECK(m.layers[1].kind == LayerKind::Fc);

    std::istringstream bad_kind("layer_id,kind,H,W,C,R,S,K,stride\n0,pool,8,8,3,3,3,4,1\n");
    CHECK(code_of([&] { parse_layer_table(bad_kind, "x"); }) == ErrorCode::ParseError);
    std::istringstream bad_order("layer_id,kind,H,W,C,R,S,K,stride\n1,conv,8,8,3,3,3,4,1\n0,conv,8,8,3,3,3,4,1\n");
    CHECK(code_of([&] { parse_layer_table(bad_order, "x"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { load_model(test::model_dir(), "nope"); }) == ErrorCode::Io);

    CHECK(load_model(test::model_dir(), "lenet").layers.size() == 5);
    CHECK(load_model(test::model_dir(), "alexnet").layers.size() == 8);
    CHECK(load_model(test::model_dir(), "mobilenet").layers.size() == 28);
    CHECK(load_model(test::model_dir(), "resnet18").layers.size() == 21);
}
