#include "seda/workload.hpp"

#include "seda/common.hpp"

#include <limits>

namespace seda::workload {
namespace {

// Each tag computed costs its own 8 B of MAC state on top of the hashed data.
constexpr std::uint64_t kTagCostBytes = 8;

}  // namespace

std::uint64_t hashing_cost(std::span<const std::vector<Span>> reads, std::uint32_t block_bytes) {
    if (block_bytes == 0)
        throw Error(ErrorCode::InvalidConfig, "block size must be positive");
    std::uint64_t blocks = 0;
    for (const auto& read : reads) {
        // Spans are ascending; a block shared by neighbouring spans of the
        // same read is verified once.
        bool any = false;
        std::uint64_t last = 0;
        for (const auto& span : read) {
            if (span.bytes == 0) continue;
            std::uint64_t first = span.offset / block_bytes;
            const std::uint64_t final_blk = (span.offset + span.bytes - 1) / block_bytes;
            if (any && first <= last) first = last + 1;
            if (final_blk >= first) {
                blocks += final_blk - first + 1;
                last = final_blk;
                any = true;
            }
        }
    }
    return blocks * (block_bytes + kTagCostBytes);
}

std::uint64_t opt_blk_score(const TilingPlan& plan_i, const TilingPlan* plan_next,
                            std::uint32_t block_bytes) {
    const auto own = plan_i.ifmap_reads();
    std::uint64_t score = hashing_cost(own, block_bytes);
    if (plan_next) {
        const auto next = plan_next->ifmap_reads();
        score += hashing_cost(next, block_bytes);
    }
    return score;
}

OptBlkChoice select_opt_blk(const TilingPlan& plan_i, const TilingPlan* plan_next,
                            std::span<const std::uint32_t> candidates) {
    if (candidates.empty())
        throw Error(ErrorCode::InvalidConfig, "optBlk candidate set is empty");

    OptBlkChoice choice;
    choice.layer_id = plan_i.layer.layer_id;
    choice.score_bytes = std::numeric_limits<std::uint64_t>::max();
    std::uint32_t largest = 0;
    std::uint64_t largest_score = 0;
    for (auto b : candidates) {
        const std::uint64_t s = opt_blk_score(plan_i, plan_next, b);
        if (s < choice.score_bytes || (s == choice.score_bytes && b > choice.block_bytes)) {
            choice.block_bytes = b;
            choice.score_bytes = s;
        }
        if (b > largest) {
            largest = b;
            largest_score = s;
        }
    }
    choice.redundant_mac_bytes =
        static_cast<std::int64_t>(largest_score) - static_cast<std::int64_t>(choice.score_bytes);
    return choice;
}

}  // namespace seda::workload
