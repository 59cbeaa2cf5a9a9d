#include "seda/adversary.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <numeric>

namespace seda::adversary {

using cipher::ProtectionBlock;

Block128 most_frequent_segment(const ProtectionBlock& blk) {
    cipher::validate_block(blk);
    // value -> (count, first index)
    std::map<Block128, std::pair<std::size_t, std::size_t>> freq;
    for (std::size_t i = 0; i < blk.segment_count(); ++i) {
        auto [it, inserted] = freq.try_emplace(blk.segment(i), 0, i);
        ++it->second.first;
    }
    auto best = freq.begin();
    for (auto it = freq.begin(); it != freq.end(); ++it) {
        const auto [count, first] = it->second;
        if (count > best->second.first ||
            (count == best->second.first && first < best->second.second))
            best = it;
    }
    return best->first;
}

ProtectionBlock seca_attack(const ProtectionBlock& cipher_blk,
                            const Block128& assumed_most_plaintext) {
    const Block128 otp = most_frequent_segment(cipher_blk) ^ assumed_most_plaintext;
    ProtectionBlock recovered = cipher_blk;
    for (std::size_t i = 0; i < recovered.segment_count(); ++i)
        recovered.set_segment(i, cipher_blk.segment(i) ^ otp);
    return recovered;
}

std::size_t recovered_segments(const ProtectionBlock& recovered, const ProtectionBlock& truth) {
    if (recovered.size() != truth.size())
        throw Error(ErrorCode::PadSizeMismatch, "recovered and reference blocks differ in size");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.segment_count(); ++i)
        hits += recovered.segment(i) == truth.segment(i);
    return hits;
}

std::vector<std::size_t> non_identity_permutation(std::size_t n, std::uint64_t seed) {
    if (n < 2)
        throw Error(ErrorCode::DegenerateLayer, "a permutation of fewer than 2 blocks is identity");
    Rng rng(seed);
    std::vector<std::size_t> perm(n);
    for (;;) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = n - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.below(i + 1)]);
        for (std::size_t i = 0; i < n; ++i)
            if (perm[i] != i) return perm;
    }
}

namespace {

struct StoredLayer {
    std::vector<ProtectionBlock> cipher;
    std::vector<cipher::CounterBlock> counters;
    std::vector<integrity::BlockPosition> positions;
};

integrity::MacTag tag_for(const cipher::RoundKeySchedule& mac_schedule, MacMode mode,
                          const ProtectionBlock& blk, const cipher::CounterBlock& ctr,
                          const integrity::BlockPosition& pos) {
    return mode == MacMode::Naive ? integrity::naive_block_mac(mac_schedule, blk)
                                  : integrity::compute_block_mac(mac_schedule, blk, ctr, pos);
}

}  // namespace

RepaOutcome repa_attack(const LayerSecrets& secrets, const LayerPlacement& placement,
                        std::span<const ProtectionBlock> plaintext_layer, MacMode mac_mode,
                        std::uint64_t seed) {
    if (plaintext_layer.size() < 2)
        throw Error(ErrorCode::DegenerateLayer, "RePA needs at least 2 blocks in the layer");

    const auto enc_schedule = cipher::expand_key(secrets.enc_key);
    const auto mac_schedule = cipher::expand_key(cipher::AesKey{secrets.mac_key.bytes});
    const std::size_t n = plaintext_layer.size();

    StoredLayer layer;
    std::vector<cipher::PadGroup> pads;
    for (std::size_t i = 0; i < n; ++i) {
        cipher::validate_block(plaintext_layer[i]);
        const std::size_t bb = plaintext_layer[i].size();
        layer.counters.emplace_back(placement.base_pa + i * bb, placement.vn);
        layer.positions.push_back({placement.layer_id, placement.fmap_idx,
                                   static_cast<std::uint32_t>(i)});
        pads.push_back(cipher::block_pads(secrets.enc_key, enc_schedule, layer.counters[i], bb));
        layer.cipher.push_back(cipher::xor_crypt(plaintext_layer[i], pads[i]));
    }

    // Layer MAC the defender holds (Alg. 2 SUM_MAC).
    integrity::LayerMacAccumulator reference(placement.layer_id, n);
    for (std::size_t i = 0; i < n; ++i)
        reference.fold(tag_for(mac_schedule, mac_mode, layer.cipher[i], layer.counters[i],
                               layer.positions[i]));

    // Attacker reorders the stored blocks; the verifier re-MACs each block as
    // found at the slot it now occupies.
    RepaOutcome outcome;
    outcome.permutation = non_identity_permutation(n, seed);
    std::vector<ProtectionBlock> tampered(n);
    for (std::size_t i = 0; i < n; ++i)
        tampered[i] = layer.cipher[outcome.permutation[i]];

    integrity::LayerMacAccumulator shuffled(placement.layer_id, n);
    for (std::size_t i = 0; i < n; ++i)
        shuffled.fold(tag_for(mac_schedule, mac_mode, tampered[i], layer.counters[i],
                              layer.positions[i]));

    outcome.verification_passed =
        integrity::verify(shuffled, reference.folded()) == integrity::VerifyResult::Pass;
    for (std::size_t i = 0; i < n && !outcome.decryption_corrupted; ++i)
        outcome.decryption_corrupted = cipher::xor_crypt(tampered[i], pads[i]) != plaintext_layer[i];
    return outcome;
}

std::vector<ProtectionBlock> sparse_tensor(const SparseTensorSpec& spec, std::size_t block_bytes,
                                           Rng& rng) {
    if (block_bytes == 0 || block_bytes % cipher::kSegmentBytes != 0)
        throw Error(ErrorCode::InvalidBlock, "block size must be a multiple of 16");
    std::vector<ProtectionBlock> blocks(spec.blocks_per_trial);
    for (auto& blk : blocks) {
        blk.bytes.assign(block_bytes, 0);
        for (std::size_t s = 0; s < blk.segment_count(); ++s)
            if (rng.unit() >= spec.zero_segment_probability)
                blk.set_segment(s, rng.block());
    }
    return blocks;
}

namespace {

constexpr std::uint64_t kCampaignBasePa = 0x40000000;

void run_seca_trial(const AttackScheme& scheme, const SparseTensorSpec& workload,
                    const LayerSecrets& secrets, const cipher::RoundKeySchedule& enc_schedule,
                    std::uint64_t trial, Rng& rng, AttackReport& report) {
    const auto tensor = sparse_tensor(workload, scheme.block_bytes, rng);
    std::uint64_t hits = 0, total = 0;
    for (std::size_t b = 0; b < tensor.size(); ++b) {
        const cipher::CounterBlock ctr(kCampaignBasePa + b * scheme.block_bytes, trial + 1);
        const std::size_t n = scheme.block_bytes / cipher::kSegmentBytes;
        const cipher::PadGroup pads =
            scheme.encryption == EncryptionMode::SharedOtp
                ? cipher::shared_pad_group(cipher::gen_base_otp(enc_schedule, ctr), n)
                : cipher::block_pads(secrets.enc_key, enc_schedule, ctr, scheme.block_bytes);
        const auto ct = cipher::xor_crypt(tensor[b], pads);
        const auto guess = seca_attack(ct, Block128{});
        hits += recovered_segments(guess, tensor[b]);
        total += n;
    }
    report.segments_recovered += hits;
    report.segments_total += total;
    if (2 * hits > total) ++report.successes;
}

}  // namespace

AttackReport run_attack_campaign(const AttackScheme& scheme, const SparseTensorSpec& workload,
                                 const LayerSecrets& secrets, std::uint64_t trials,
                                 std::uint64_t seed) {
    if (trials < 1)
        throw Error(ErrorCode::InvalidConfig, "attack campaign needs at least one trial");
    if (workload.blocks_per_trial < 1)
        throw Error(ErrorCode::InvalidConfig, "attack workload needs at least one block");

    AttackReport report;
    report.scheme_label = scheme.label;
    report.workload_label = workload.label;
    report.attempts = trials;

    const auto enc_schedule = cipher::expand_key(secrets.enc_key);
    for (std::uint64_t t = 0; t < trials; ++t) {
        Rng rng(seed, t);
        if (scheme.attack == AttackKind::Seca) {
            run_seca_trial(scheme, workload, secrets, enc_schedule, t, rng, report);
        } else {
            const auto layer = sparse_tensor(workload, scheme.block_bytes, rng);
            LayerPlacement placement;
            placement.base_pa = kCampaignBasePa;
            placement.vn = t + 1;
            placement.layer_id = static_cast<std::uint32_t>(t % 64);
            const auto outcome = repa_attack(secrets, placement, layer, scheme.mac_mode,
                                             rng.next_u64());
            if (outcome.verification_passed && outcome.decryption_corrupted) ++report.successes;
        }
    }
    if (scheme.attack == AttackKind::Seca)
        report.recovered_fraction = report.segments_total == 0
                                        ? 0.0
                                        : static_cast<double>(report.segments_recovered) /
                                              static_cast<double>(report.segments_total);
    else
        report.recovered_fraction =
            static_cast<double>(report.successes) / static_cast<double>(report.attempts);
    return report;
}

std::string attack_csv_header() {
    return "scheme,workload,attempts,successes,recovered_fraction,segments_total,"
           "segments_recovered";
}

std::string attack_csv_row(const AttackReport& r) {
    return fmt::format("{},{},{},{},{:.6f},{},{}", r.scheme_label, r.workload_label, r.attempts,
                       r.successes, r.recovered_fraction, r.segments_total,
                       r.segments_recovered);
}

}  // namespace seda::adversary
