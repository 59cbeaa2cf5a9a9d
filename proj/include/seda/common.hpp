#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace seda {

enum class ErrorCode {
    SegmentCountExceedsSchedule,
    PadSizeMismatch,
    VersionOverflow,
    InvalidBlock,
    FoldAfterSeal,
    VerifyBeforeComplete,
    LayerMismatch,
    DegenerateLayer,
    InvalidLayer,
    LayerTooLargeForSram,
    ParseError,
    NonMonotonicCycle,
    UnalignedDataEvent,
    NonDataEvent,
    MissingLayerContext,
    MismatchedWorkload,
    InvalidConfig,
    Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

using Block128 = std::array<std::uint8_t, 16>;

inline Block128 operator^(const Block128& a, const Block128& b) {
    Block128 out{};
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(a[i] ^ b[i]);
    return out;
}

inline Block128& operator^=(Block128& a, const Block128& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        a[i] ^= b[i];
    return a;
}

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(std::string_view hex);
Block128 block_from_hex(std::string_view hex);

/// Big-endian store of the low `width` bytes of `value` at `out`.
inline void store_be(std::uint8_t* out, std::uint64_t value, std::size_t width) {
    for (std::size_t i = 0; i < width; ++i)
        out[width - 1 - i] = static_cast<std::uint8_t>(value >> (8 * i));
}

inline std::uint64_t load_be64(const std::uint8_t* in) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i)
        v = (v << 8) | in[i];
    return v;
}

/// Platform-stable random stream: mt19937_64 output mapped without
/// std::*_distribution, so seeded runs produce identical bytes everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    /// Uniform in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound);
    /// Uniform double in [0, 1) with 53-bit resolution.
    double unit();
    Block128 block();

private:
    std::mt19937_64 engine_;
};

}  // namespace seda
