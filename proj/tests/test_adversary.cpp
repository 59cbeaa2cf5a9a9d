#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "seda/adversary.hpp"

#include <algorithm>
#include <set>

using namespace seda;
using namespace seda::adversary;
using cipher::ProtectionBlock;

namespace {

LayerSecrets secrets() {
    return {cipher::AesKey{block_from_hex("2b7e151628aed2a6abf7158809cf4f3c")},
            integrity::MacKey{block_from_hex("000102030405060708090a0b0c0d0e0f")}};
}

ProtectionBlock block_of(std::initializer_list<Block128> segs) {
    ProtectionBlock b;
    b.bytes.resize(segs.size() * 16);
    std::size_t i = 0;
    for (const auto& s : segs) b.set_segment(i++, s);
    return b;
}

Block128 filled(std::uint8_t v) {
    Block128 b;
    b.fill(v);
    return b;
}

std::vector<ProtectionBlock> random_layer(std::size_t blocks, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<ProtectionBlock> layer(blocks);
    for (auto& b : layer) {
        b.bytes.resize(64);
        for (auto& x : b.bytes) x = static_cast<std::uint8_t>(rng.next_u64());
    }
    return layer;
}

}  // namespace

TEST_CASE("most frequent segment breaks ties by first occurrence") {
    CHECK(most_frequent_segment(block_of({filled(1), filled(2), filled(2), filled(3)})) == filled(2));
    CHECK(most_frequent_segment(block_of({filled(9), filled(4), filled(4), filled(9)})) == filled(9));
    CHECK(most_frequent_segment(block_of({filled(5), filled(6), filled(7), filled(8)})) == filled(5));
}

TEST_CASE("seca recovers a shared pad but not a pad group") {
    const auto key = secrets().enc_key;
    const auto sched = cipher::expand_key(key);
    const cipher::CounterBlock ctr(0x4000, 3);
    const Block128 base = cipher::gen_base_otp(sched, ctr);
    const ProtectionBlock plain = block_of({Block128{}, Block128{}, filled(0xab), Block128{}});

    const auto shared = cipher::xor_crypt(plain, cipher::shared_pad_group(base, 4));
    CHECK(seca_attack(shared, Block128{}) == plain);
    CHECK(recovered_segments(seca_attack(shared, Block128{}), plain) == 4);

    const auto grouped = cipher::xor_crypt(plain, cipher::block_pads(key, sched, ctr, 64));
    CHECK(recovered_segments(seca_attack(grouped, Block128{}), plain) <= 1);
}

TEST_CASE("seca campaign separates the two encryption modes") {
    AttackScheme shared{"shared", AttackKind::Seca, EncryptionMode::SharedOtp, MacMode::PositionBound, 64};
    AttackScheme grouped{"grouped", AttackKind::Seca, EncryptionMode::PadGroup, MacMode::PositionBound, 64};
    const auto a = run_attack_campaign(shared, SparseTensorSpec{}, secrets(), 100, 7);
    const auto b = run_attack_campaign(grouped, SparseTensorSpec{}, secrets(), 100, 7);
    CHECK(a.attempts == 100);
    CHECK(a.segments_total == 100 * 64 * 4);
    CHECK(a.recovered_fraction >= 0.95);
    CHECK(a.successes == 100);
    // With four segments a distinct pad per segment leaves only the one whose
    // ciphertext happens to be chosen (roughly P(zero) / 4 of segments).
    CHECK(b.recovered_fraction <= 0.25 + 0.05);
    CHECK(b.successes == 0);
    CHECK(run_attack_campaign(shared, SparseTensorSpec{}, secrets(), 100, 7) == a);
}

TEST_CASE("non identity permutation") {
    std::set<std::vector<std::size_t>> seen;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto p = non_identity_permutation(8, s);
        std::vector<std::size_t> sorted = p;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < 8; ++i) REQUIRE(sorted[i] == i);
        bool identity = true;
        for (std::size_t i = 0; i < 8; ++i) identity &= p[i] == i;
        REQUIRE_FALSE(identity);
        seen.insert(p);
    }
    CHECK(seen.size() > 150);
    CHECK(non_identity_permutation(2, 9) == std::vector<std::size_t>{1, 0});
    CHECK(non_identity_permutation(8, 3) == non_identity_permutation(8, 3));
    for (std::size_t n : {0u, 1u}) {
        try {
            (void)non_identity_permutation(n, 1);
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DegenerateLayer);
        }
    }
}

TEST_CASE("repa passes a naive xor mac and fails a position-bound one") {
    const auto layer = random_layer(16, 99);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto naive = repa_attack(secrets(), LayerPlacement{}, layer, MacMode::Naive, seed);
        CHECK(naive.verification_passed);
        CHECK(naive.decryption_corrupted);
        const auto bound = repa_attack(secrets(), LayerPlacement{}, layer, MacMode::PositionBound, seed);
        CHECK_FALSE(bound.verification_passed);
        CHECK(bound.permutation == naive.permutation);
    }
}

TEST_CASE("repa campaign report") {
    AttackScheme naive{"naive", AttackKind::Repa, EncryptionMode::PadGroup, MacMode::Naive, 64};
    AttackScheme bound{"bound", AttackKind::Repa, EncryptionMode::PadGroup, MacMode::PositionBound, 64};
    const auto a = run_attack_campaign(naive, SparseTensorSpec{}, secrets(), 200, 3);
    const auto b = run_attack_campaign(bound, SparseTensorSpec{}, secrets(), 200, 3);
    CHECK(a.successes == 200);
    CHECK(a.recovered_fraction == 1.0);
    CHECK(b.successes == 0);
    CHECK(attack_csv_row(a) == "naive,sparse_p075,200,200,1.000000,0,0");
    CHECK(attack_csv_header() ==
          "scheme,workload,attempts,successes,recovered_fraction,segments_total,segments_recovered");
}

TEST_CASE("sparse tensor statistics") {
    Rng rng(1);
    SparseTensorSpec spec;
    spec.blocks_per_trial = 2000;
    const auto blocks = sparse_tensor(spec, 64, rng);
    std::size_t zero = 0;
    for (const auto& b : blocks)
        for (std::size_t s = 0; s < b.segment_count(); ++s) zero += b.segment(s) == Block128{};
    const double p = static_cast<double>(zero) / (2000.0 * 4);
    CHECK(p == doctest::Approx(0.75).epsilon(0.03));
}
