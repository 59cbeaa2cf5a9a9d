#include "seda/cipher.hpp"

#include <string>

namespace seda::cipher {

CounterBlock::CounterBlock(std::uint64_t pa, std::uint64_t vn, unsigned vn_bits)
    : pa_(pa), vn_(vn), vn_bits_(vn_bits) {
    if (vn_bits == 0 || vn_bits > 64)
        throw Error(ErrorCode::InvalidConfig, "VN width must be in [1, 64]");
    if (vn_bits < 64 && (vn >> vn_bits) != 0)
        throw Error(ErrorCode::VersionOverflow,
                    "VN does not fit in " + std::to_string(vn_bits) + " bits");
}

Block128 CounterBlock::serialize() const {
    Block128 out{};
    store_be(out.data(), pa_, 8);
    store_be(out.data() + 8, vn_, 8);
    return out;
}

CounterBlock CounterBlock::next_version() const {
    const std::uint64_t max_vn = vn_bits_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << vn_bits_) - 1;
    if (vn_ == max_vn)
        throw Error(ErrorCode::VersionOverflow, "VN exhausted for PA");
    return CounterBlock(pa_, vn_ + 1, vn_bits_);
}

Block128 gen_base_otp(const RoundKeySchedule& schedule, const CounterBlock& ctr) {
    return aes_encrypt_block(schedule, ctr.serialize());
}

PadGroup derive_pad_group(const RoundKeySchedule& schedule, const Block128& base,
                          std::size_t n_segments) {
    if (n_segments == 0)
        throw Error(ErrorCode::InvalidBlock, "pad group needs at least one segment");
    if (n_segments > kRoundKeys)
        throw Error(ErrorCode::SegmentCountExceedsSchedule,
                    std::to_string(n_segments) + " segments requested, schedule holds 11");
    PadGroup group;
    group.base = base;
    group.segments.reserve(n_segments);
    for (std::size_t i = 0; i < n_segments; ++i)
        group.segments.push_back(base ^ schedule.round_keys[i]);
    return group;
}

PadGroup derive_pad_group_extended(const AesKey& key, const CounterBlock& ctr,
                                   std::size_t n_segments) {
    if (n_segments == 0)
        throw Error(ErrorCode::InvalidBlock, "pad group needs at least one segment");
    PadGroup group;
    group.base = gen_base_otp(expand_key(key), ctr);
    group.segments.reserve(n_segments);

    const Block128 seed = key.bytes ^ ctr.serialize();
    for (std::uint64_t j = 0; group.segments.size() < n_segments; ++j) {
        Block128 tweak{};
        store_be(tweak.data() + 8, j, 8);
        const RoundKeySchedule schedule = expand_key(AesKey{seed ^ tweak});
        for (std::size_t i = 0; i < kRoundKeys && group.segments.size() < n_segments; ++i)
            group.segments.push_back(group.base ^ schedule.round_keys[i]);
    }
    return group;
}

PadGroup shared_pad_group(const Block128& base, std::size_t n_segments) {
    return PadGroup{base, std::vector<Block128>(n_segments, base)};
}

Block128 ProtectionBlock::segment(std::size_t i) const {
    Block128 out{};
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(i * kSegmentBytes), kSegmentBytes,
                out.begin());
    return out;
}

void ProtectionBlock::set_segment(std::size_t i, const Block128& value) {
    std::copy(value.begin(), value.end(),
              bytes.begin() + static_cast<std::ptrdiff_t>(i * kSegmentBytes));
}

void validate_block(const ProtectionBlock& block) {
    if (block.bytes.empty() || block.bytes.size() % kSegmentBytes != 0)
        throw Error(ErrorCode::InvalidBlock,
                    "block length " + std::to_string(block.bytes.size()) +
                        " is not a non-zero multiple of 16");
}

ProtectionBlock xor_crypt(const ProtectionBlock& block, const PadGroup& pads) {
    if (block.bytes.size() != pads.bytes())
        throw Error(ErrorCode::PadSizeMismatch,
                    "block of " + std::to_string(block.bytes.size()) + " bytes, pads cover " +
                        std::to_string(pads.bytes()));
    ProtectionBlock out = block;
    for (std::size_t s = 0; s < pads.segments.size(); ++s) {
        const Block128& pad = pads.segments[s];
        for (std::size_t i = 0; i < kSegmentBytes; ++i)
            out.bytes[s * kSegmentBytes + i] ^= pad[i];
    }
    return out;
}

PadGroup block_pads(const AesKey& key, const RoundKeySchedule& schedule, const CounterBlock& ctr,
                    std::size_t block_bytes) {
    if (block_bytes == 0 || block_bytes % kSegmentBytes != 0)
        throw Error(ErrorCode::InvalidBlock, "block size must be a multiple of 16");
    const std::size_t n = block_bytes / kSegmentBytes;
    if (n <= kRoundKeys)
        return derive_pad_group(schedule, gen_base_otp(schedule, ctr), n);
    return derive_pad_group_extended(key, ctr, n);
}

}  // namespace seda::cipher
