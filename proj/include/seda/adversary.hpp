#pragma once

// Executable SECA (shared-pad frequency analysis) and RePA (block
// re-permutation under XOR-folded MACs) attacks.

#include "seda/cipher.hpp"
#include "seda/integrity.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace seda::adversary {

/// Most frequent 16-byte segment; ties go to the lowest first occurrence.
Block128 most_frequent_segment(const cipher::ProtectionBlock& blk);

cipher::ProtectionBlock seca_attack(const cipher::ProtectionBlock& cipher_blk,
                                    const Block128& assumed_most_plaintext);

/// Segments of `recovered` equal to `truth`, segment by segment.
std::size_t recovered_segments(const cipher::ProtectionBlock& recovered,
                               const cipher::ProtectionBlock& truth);

enum class MacMode { Naive, PositionBound };

struct LayerSecrets {
    cipher::AesKey enc_key;
    integrity::MacKey mac_key;
};

/// Where a layer lives: block i sits at base_pa + i * block_bytes with the
/// given VN, and at position (layer_id, fmap_idx, i).
struct LayerPlacement {
    std::uint64_t base_pa = 0x10000;
    std::uint64_t vn = 1;
    std::uint32_t layer_id = 0;
    std::uint32_t fmap_idx = 0;
};

struct RepaOutcome {
    bool verification_passed = false;
    bool decryption_corrupted = false;
    std::vector<std::size_t> permutation;
};

/// Seeded Fisher-Yates permutation of [0, n), redrawn until non-identity.
std::vector<std::size_t> non_identity_permutation(std::size_t n, std::uint64_t seed);

/// Encrypts and MACs `plaintext_layer` in place, lets the attacker shuffle the
/// stored ciphertext blocks, then re-verifies the layer MAC and decrypts.
RepaOutcome repa_attack(const LayerSecrets& secrets, const LayerPlacement& placement,
                        std::span<const cipher::ProtectionBlock> plaintext_layer,
                        MacMode mac_mode, std::uint64_t seed);

enum class AttackKind { Seca, Repa };
enum class EncryptionMode { SharedOtp, PadGroup };

struct AttackScheme {
    std::string label;
    AttackKind attack = AttackKind::Seca;
    EncryptionMode encryption = EncryptionMode::PadGroup;
    MacMode mac_mode = MacMode::PositionBound;
    std::size_t block_bytes = 64;
};

/// Synthetic sparse tensor: each 16-byte segment is zero with the given
/// probability and uniform random otherwise.
struct SparseTensorSpec {
    std::string label = "sparse_p075";
    std::size_t blocks_per_trial = 64;
    double zero_segment_probability = 0.75;
};

std::vector<cipher::ProtectionBlock> sparse_tensor(const SparseTensorSpec& spec,
                                                   std::size_t block_bytes, Rng& rng);

struct AttackReport {
    std::string scheme_label;
    std::string workload_label;
    std::uint64_t attempts = 0;
    std::uint64_t successes = 0;
    double recovered_fraction = 0.0;
    // Segment-level detail for SECA; zero for RePA.
    std::uint64_t segments_total = 0;
    std::uint64_t segments_recovered = 0;

    friend bool operator==(const AttackReport&, const AttackReport&) = default;
};

/// SECA: attempts = trials, success = a trial in which more than half of the
/// tensor's segments were recovered exactly, recovered_fraction = recovered
/// segments / all segments. RePA: attempts = trials (one permutation each),
/// success = a permutation that passed verification, recovered_fraction =
/// successes / attempts.
AttackReport run_attack_campaign(const AttackScheme& scheme, const SparseTensorSpec& workload,
                                 const LayerSecrets& secrets, std::uint64_t trials,
                                 std::uint64_t seed);

std::string attack_csv_header();
std::string attack_csv_row(const AttackReport& report);

}  // namespace seda::adversary
