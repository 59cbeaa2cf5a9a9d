#include "seda/common.hpp"

#include <cctype>

namespace seda {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::SegmentCountExceedsSchedule: return "SegmentCountExceedsSchedule";
    case ErrorCode::PadSizeMismatch: return "PadSizeMismatch";
    case ErrorCode::VersionOverflow: return "VersionOverflow";
    case ErrorCode::InvalidBlock: return "InvalidBlock";
    case ErrorCode::FoldAfterSeal: return "FoldAfterSeal";
    case ErrorCode::VerifyBeforeComplete: return "VerifyBeforeComplete";
    case ErrorCode::LayerMismatch: return "LayerMismatch";
    case ErrorCode::DegenerateLayer: return "DegenerateLayer";
    case ErrorCode::InvalidLayer: return "InvalidLayer";
    case ErrorCode::LayerTooLargeForSram: return "LayerTooLargeForSram";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonMonotonicCycle: return "NonMonotonicCycle";
    case ErrorCode::UnalignedDataEvent: return "UnalignedDataEvent";
    case ErrorCode::NonDataEvent: return "NonDataEvent";
    case ErrorCode::MissingLayerContext: return "MissingLayerContext";
    case ErrorCode::MismatchedWorkload: return "MismatchedWorkload";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

namespace {

int nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

std::vector<std::uint8_t> from_hex(std::string_view hex) {
    if (hex.starts_with("0x") || hex.starts_with("0X"))
        hex.remove_prefix(2);
    if (hex.size() % 2 != 0)
        throw Error(ErrorCode::ParseError, "odd-length hex string");
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = nibble(hex[2 * i]);
        int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0)
            throw Error(ErrorCode::ParseError, "invalid hex digit");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

Block128 block_from_hex(std::string_view hex) {
    auto bytes = from_hex(hex);
    if (bytes.size() != 16)
        throw Error(ErrorCode::ParseError, "expected 32 hex digits");
    Block128 out{};
    std::copy(bytes.begin(), bytes.end(), out.begin());
    return out;
}

Rng::Rng(std::uint64_t seed) : Rng(seed, 0) {}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

std::uint64_t Rng::next_u64() { return engine_(); }

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    // Reject the short top interval so every residue is equally likely.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    for (;;) {
        std::uint64_t r = engine_();
        if (r < limit) return r % bound;
    }
}

double Rng::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

Block128 Rng::block() {
    Block128 out{};
    store_be(out.data(), engine_(), 8);
    store_be(out.data() + 8, engine_(), 8);
    return out;
}

}  // namespace seda
