#include "seda/integrity.hpp"

#include <string>

namespace seda::integrity {

using cipher::kSegmentBytes;

MacTag keyed_hash(const cipher::RoundKeySchedule& mac_schedule,
                  std::span<const std::uint8_t> message) {
    Block128 chain{};
    const std::size_t full = message.size() / kSegmentBytes;
    for (std::size_t b = 0; b < full; ++b) {
        for (std::size_t i = 0; i < kSegmentBytes; ++i)
            chain[i] ^= message[b * kSegmentBytes + i];
        chain = cipher::aes_encrypt_block(mac_schedule, chain);
    }
    const std::size_t tail = message.size() % kSegmentBytes;
    if (tail != 0 || message.empty()) {
        for (std::size_t i = 0; i < tail; ++i)
            chain[i] ^= message[full * kSegmentBytes + i];
        chain = cipher::aes_encrypt_block(mac_schedule, chain);
    }
    return MacTag{load_be64(chain.data())};
}

std::vector<std::uint8_t> block_mac_message(const cipher::ProtectionBlock& cipher_blk,
                                            const cipher::CounterBlock& ctr,
                                            const BlockPosition& pos) {
    std::vector<std::uint8_t> msg(cipher_blk.bytes);
    const std::size_t off = msg.size();
    msg.resize(off + 8 + 8 + 4 + 4 + 4);
    store_be(&msg[off], ctr.pa(), 8);
    store_be(&msg[off + 8], ctr.vn(), 8);
    store_be(&msg[off + 16], pos.layer_id, 4);
    store_be(&msg[off + 20], pos.fmap_idx, 4);
    store_be(&msg[off + 24], pos.blk_idx, 4);
    return msg;
}

MacTag compute_block_mac(const cipher::RoundKeySchedule& mac_schedule,
                         const cipher::ProtectionBlock& cipher_blk,
                         const cipher::CounterBlock& ctr, const BlockPosition& pos) {
    if (cipher_blk.bytes.empty())
        throw Error(ErrorCode::InvalidBlock, "cannot MAC an empty block");
    return keyed_hash(mac_schedule, block_mac_message(cipher_blk, ctr, pos));
}

MacTag compute_block_mac(const MacKey& key, const cipher::ProtectionBlock& cipher_blk,
                         const cipher::CounterBlock& ctr, const BlockPosition& pos) {
    return compute_block_mac(cipher::expand_key(cipher::AesKey{key.bytes}), cipher_blk, ctr, pos);
}

MacTag naive_block_mac(const cipher::RoundKeySchedule& mac_schedule,
                       const cipher::ProtectionBlock& cipher_blk) {
    if (cipher_blk.bytes.empty())
        throw Error(ErrorCode::InvalidBlock, "cannot MAC an empty block");
    return keyed_hash(mac_schedule, cipher_blk.bytes);
}

MacTag naive_block_mac(const MacKey& key, const cipher::ProtectionBlock& cipher_blk) {
    return naive_block_mac(cipher::expand_key(cipher::AesKey{key.bytes}), cipher_blk);
}

LayerMacAccumulator::LayerMacAccumulator(std::uint32_t layer_id, std::uint64_t expected_blocks)
    : layer_id_(layer_id), expected_blocks_(expected_blocks) {}

LayerMacAccumulator& LayerMacAccumulator::fold(MacTag tag) {
    folded_ ^= tag.tag;
    ++count_;
    return *this;
}

LayerMacAccumulator& LayerMacAccumulator::fold(MacTag tag, const BlockPosition& pos) {
    if (pos.layer_id != layer_id_)
        throw Error(ErrorCode::LayerMismatch, "tag for layer " + std::to_string(pos.layer_id) +
                                                  " folded into layer " +
                                                  std::to_string(layer_id_));
    return fold(tag);
}

LayerMacAccumulator fold_layer_mac(LayerMacAccumulator acc, MacTag tag) {
    acc.fold(tag);
    return acc;
}

ModelMacAccumulator& ModelMacAccumulator::fold(std::uint64_t layer_mac) {
    if (sealed_)
        throw Error(ErrorCode::FoldAfterSeal, "model MAC already sealed");
    folded_ ^= layer_mac;
    ++layers_;
    return *this;
}

ModelMacAccumulator& ModelMacAccumulator::seal() noexcept {
    sealed_ = true;
    return *this;
}

ModelMacAccumulator fold_model_mac(ModelMacAccumulator acc, std::uint64_t layer_mac) {
    acc.fold(layer_mac);
    return acc;
}

VerifyResult verify(VerifyLevel, std::uint64_t expected, std::uint64_t actual) {
    return expected == actual ? VerifyResult::Pass : VerifyResult::Fail;
}

VerifyResult verify(const LayerMacAccumulator& acc, std::uint64_t expected) {
    if (!acc.complete())
        throw Error(ErrorCode::VerifyBeforeComplete,
                    "layer " + std::to_string(acc.layer_id()) + " has " +
                        std::to_string(acc.count()) + " of " +
                        std::to_string(acc.expected_blocks()) + " blocks folded");
    return verify(VerifyLevel::Layer, expected, acc.folded());
}

VerifyResult verify(const ModelMacAccumulator& acc, std::uint64_t expected) {
    if (!acc.sealed())
        throw Error(ErrorCode::VerifyBeforeComplete, "model MAC not sealed");
    return verify(VerifyLevel::Model, expected, acc.folded());
}

}  // namespace seda::integrity
