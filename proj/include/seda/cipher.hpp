#pragma once

// AES-128 core, CTR one-time pads over (PA || VN) counters, pad-group
// derivation from the key schedule, and the engine area/power model.

#include "seda/common.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace seda::cipher {

inline constexpr std::size_t kSegmentBytes = 16;
inline constexpr std::size_t kRoundKeys = 11;
inline constexpr unsigned kDefaultVnBits = 56;

/// 128-bit encryption key. Deliberately has no stream or string conversion.
struct AesKey {
    Block128 bytes{};

    friend bool operator==(const AesKey&, const AesKey&) = default;
};

struct RoundKeySchedule {
    std::array<Block128, kRoundKeys> round_keys{};

    friend bool operator==(const RoundKeySchedule&, const RoundKeySchedule&) = default;
};

RoundKeySchedule expand_key(const AesKey& key);

Block128 aes_encrypt_block(const RoundKeySchedule& schedule, const Block128& block);
Block128 aes_decrypt_block(const RoundKeySchedule& schedule, const Block128& block);

/// CTR counter: physical address in the high half, version number in the
/// low half, each big-endian.
class CounterBlock {
public:
    CounterBlock(std::uint64_t pa, std::uint64_t vn, unsigned vn_bits = kDefaultVnBits);

    std::uint64_t pa() const noexcept { return pa_; }
    std::uint64_t vn() const noexcept { return vn_; }
    unsigned vn_bits() const noexcept { return vn_bits_; }

    Block128 serialize() const;

    /// Same PA, VN + 1. Throws VersionOverflow past the configured width.
    CounterBlock next_version() const;

    friend bool operator==(const CounterBlock&, const CounterBlock&) = default;

private:
    std::uint64_t pa_;
    std::uint64_t vn_;
    unsigned vn_bits_;
};

Block128 gen_base_otp(const RoundKeySchedule& schedule, const CounterBlock& ctr);

struct PadGroup {
    Block128 base{};
    std::vector<Block128> segments;

    std::size_t bytes() const noexcept { return segments.size() * kSegmentBytes; }
};

/// segments[i] = base ^ round_keys[i] for i < n_segments (n_segments <= 11).
PadGroup derive_pad_group(const RoundKeySchedule& schedule, const Block128& base,
                          std::size_t n_segments);

/// Pad group for blocks wider than one schedule covers. Schedule j is
/// expanded from key ^ ctr ^ j (j big-endian in the low bytes); the base
/// pad is the ordinary CTR pad under `key`.
PadGroup derive_pad_group_extended(const AesKey& key, const CounterBlock& ctr,
                                   std::size_t n_segments);

/// Every segment carries the same pad. Only the SECA target uses this.
PadGroup shared_pad_group(const Block128& base, std::size_t n_segments);

struct ProtectionBlock {
    std::vector<std::uint8_t> bytes;

    std::size_t size() const noexcept { return bytes.size(); }
    std::size_t segment_count() const noexcept { return bytes.size() / kSegmentBytes; }
    Block128 segment(std::size_t i) const;
    void set_segment(std::size_t i, const Block128& value);

    friend bool operator==(const ProtectionBlock&, const ProtectionBlock&) = default;
};

/// Throws InvalidBlock unless the length is a non-zero multiple of 16.
void validate_block(const ProtectionBlock& block);

ProtectionBlock xor_crypt(const ProtectionBlock& block, const PadGroup& pads);

/// Pad group the engine would produce for one block: the derived group when
/// it fits one schedule, otherwise the extended derivation.
PadGroup block_pads(const AesKey& key, const RoundKeySchedule& schedule,
                    const CounterBlock& ctr, std::size_t block_bytes);

enum class EngineVariant { TAes, BAes };

struct EngineCostModel {
    double aes_area_units = 100.0;
    double aes_power_units = 100.0;
    double xor_bank_area_units = 2.0;
    double xor_bank_power_units = 2.0;
    double aes_latency_cycles = 10.0;
    double aes_throughput_bytes_per_cycle = 16.0;

    void validate() const;
};

struct EngineCost {
    double area_units = 0.0;
    double power_units = 0.0;
};

EngineCost engine_cost(const EngineCostModel& model, std::uint32_t bandwidth_multiple,
                       EngineVariant variant);

/// Pad bytes per cycle either variant delivers at the given multiple.
double engine_bandwidth(const EngineCostModel& model, std::uint32_t bandwidth_multiple);

}  // namespace seda::cipher
