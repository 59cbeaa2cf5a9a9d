#pragma once

// Position-bound block MACs and the XOR-folded layer/model MAC hierarchy.

#include "seda/cipher.hpp"

#include <cstdint>
#include <span>

namespace seda::integrity {

struct MacKey {
    Block128 bytes{};

    friend bool operator==(const MacKey&, const MacKey&) = default;
};

struct BlockPosition {
    std::uint32_t layer_id = 0;
    std::uint32_t fmap_idx = 0;
    std::uint32_t blk_idx = 0;

    friend bool operator==(const BlockPosition&, const BlockPosition&) = default;
};

struct MacTag {
    std::uint64_t tag = 0;

    friend bool operator==(const MacTag&, const MacTag&) = default;
};

inline constexpr std::size_t kMacBytes = 8;

/// AES CBC-MAC (zero IV) over `message` zero-padded to a 16-byte multiple,
/// truncated to the first 64 bits of the final chaining value.
MacTag keyed_hash(const cipher::RoundKeySchedule& mac_schedule,
                  std::span<const std::uint8_t> message);

/// MAC over blk || PA || VN || layer_id || fmap_idx || blk_idx.
MacTag compute_block_mac(const MacKey& key, const cipher::ProtectionBlock& cipher_blk,
                         const cipher::CounterBlock& ctr, const BlockPosition& pos);
MacTag compute_block_mac(const cipher::RoundKeySchedule& mac_schedule,
                         const cipher::ProtectionBlock& cipher_blk,
                         const cipher::CounterBlock& ctr, const BlockPosition& pos);

/// MAC over the ciphertext alone. Kept only as the re-permutation target.
MacTag naive_block_mac(const MacKey& key, const cipher::ProtectionBlock& cipher_blk);
MacTag naive_block_mac(const cipher::RoundKeySchedule& mac_schedule,
                       const cipher::ProtectionBlock& cipher_blk);

/// Exact byte string hashed by compute_block_mac, before padding.
std::vector<std::uint8_t> block_mac_message(const cipher::ProtectionBlock& cipher_blk,
                                            const cipher::CounterBlock& ctr,
                                            const BlockPosition& pos);

class LayerMacAccumulator {
public:
    LayerMacAccumulator(std::uint32_t layer_id, std::uint64_t expected_blocks);

    /// folded ^= tag.
    LayerMacAccumulator& fold(MacTag tag);
    /// As fold(tag), rejecting tags whose position names another layer.
    LayerMacAccumulator& fold(MacTag tag, const BlockPosition& pos);

    std::uint32_t layer_id() const noexcept { return layer_id_; }
    std::uint64_t folded() const noexcept { return folded_; }
    std::uint64_t count() const noexcept { return count_; }
    std::uint64_t expected_blocks() const noexcept { return expected_blocks_; }
    bool complete() const noexcept { return count_ >= expected_blocks_; }

private:
    std::uint32_t layer_id_;
    std::uint64_t expected_blocks_;
    std::uint64_t folded_ = 0;
    std::uint64_t count_ = 0;
};

LayerMacAccumulator fold_layer_mac(LayerMacAccumulator acc, MacTag tag);

class ModelMacAccumulator {
public:
    ModelMacAccumulator& fold(std::uint64_t layer_mac);
    ModelMacAccumulator& seal() noexcept;

    std::uint64_t folded() const noexcept { return folded_; }
    bool sealed() const noexcept { return sealed_; }
    std::uint64_t layers() const noexcept { return layers_; }

private:
    std::uint64_t folded_ = 0;
    std::uint64_t layers_ = 0;
    bool sealed_ = false;
};

ModelMacAccumulator fold_model_mac(ModelMacAccumulator acc, std::uint64_t layer_mac);

enum class VerifyLevel { OptBlk, Layer, Model };
enum class VerifyResult { Pass, Fail };

VerifyResult verify(VerifyLevel level, std::uint64_t expected, std::uint64_t actual);
/// Throws VerifyBeforeComplete until every expected block has been folded.
VerifyResult verify(const LayerMacAccumulator& acc, std::uint64_t expected);
/// Throws VerifyBeforeComplete until the accumulator is sealed.
VerifyResult verify(const ModelMacAccumulator& acc, std::uint64_t expected);

}  // namespace seda::integrity
