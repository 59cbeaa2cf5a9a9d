#include "seda/schemes.hpp"

#include "seda/common.hpp"

#include <bit>

namespace seda::schemes {

MetadataCache::MetadataCache(const CacheConfig& config) : config_(config) {
    if (config.line_bytes == 0 || config.sector_bytes == 0 || config.ways == 0 ||
        config.line_bytes % config.sector_bytes != 0 ||
        config.line_bytes / config.sector_bytes > 64)
        throw Error(ErrorCode::InvalidConfig, "bad metadata cache geometry");
    const std::uint64_t lines = config.capacity_bytes / config.line_bytes;
    if (lines == 0 || lines % config.ways != 0)
        throw Error(ErrorCode::InvalidConfig, "cache capacity must hold a whole number of sets");
    sets_ = static_cast<std::size_t>(lines / config.ways);
    sectors_per_line_ = config.line_bytes / config.sector_bytes;
    lines_.resize(sets_ * config.ways);
}

Writeback MetadataCache::make_writeback(const Line& line, std::size_t set) const {
    const std::uint64_t line_no = line.tag * sets_ + set;
    const std::uint64_t base = line_no * config_.line_bytes;
    const int first = std::countr_zero(line.dirty_sectors);
    return Writeback{base, base + static_cast<std::uint64_t>(first) * config_.sector_bytes,
                     static_cast<std::uint32_t>(std::popcount(line.dirty_sectors)) *
                         config_.sector_bytes};
}

CacheAccess MetadataCache::access(std::uint64_t address, bool is_write, bool fetch_on_miss) {
    const std::uint64_t line_no = address / config_.line_bytes;
    const std::size_t set = static_cast<std::size_t>(line_no % sets_);
    const std::uint64_t tag = line_no / sets_;
    const std::uint32_t sector =
        static_cast<std::uint32_t>((address % config_.line_bytes) / config_.sector_bytes);
    const std::uint64_t sector_bit = std::uint64_t{1} << sector;

    ++counters_.lookups;
    ++clock_;
    Line* ways = &lines_[set * config_.ways];

    CacheAccess result;
    Line* line = nullptr;
    for (std::uint32_t w = 0; w < config_.ways; ++w)
        if (ways[w].valid && ways[w].tag == tag) line = &ways[w];

    if (line && (line->valid_sectors & sector_bit)) {
        result.hit = true;
        ++counters_.hits;
    } else {
        ++counters_.misses;
        if (!line) {
            Line* victim = nullptr;
            for (std::uint32_t w = 0; w < config_.ways && !victim; ++w)
                if (!ways[w].valid) victim = &ways[w];
            if (!victim) {
                victim = &ways[0];
                for (std::uint32_t w = 1; w < config_.ways; ++w)
                    if (ways[w].stamp < victim->stamp) victim = &ways[w];
                if (victim->dirty_sectors) {
                    result.writeback = make_writeback(*victim, set);
                    ++counters_.writebacks;
                    counters_.writeback_bytes += result.writeback->bytes;
                }
            }
            *victim = Line{tag, 0, 0, 0, true};
            line = victim;
        }
        if (!is_write || fetch_on_miss) {
            result.fill_bytes = config_.sector_bytes;
            result.fill_address = line_no * config_.line_bytes +
                                  std::uint64_t{sector} * config_.sector_bytes;
            counters_.fill_bytes += config_.sector_bytes;
        }
        line->valid_sectors |= sector_bit;
    }
    if (is_write && !(line->dirty_sectors & sector_bit)) {
        line->dirty_sectors |= sector_bit;
        counters_.dirty_bytes_created += config_.sector_bytes;
    }
    line->stamp = clock_;
    return result;
}

CacheAccess MetadataCache::read(std::uint64_t address) { return access(address, false, false); }

CacheAccess MetadataCache::write(std::uint64_t address, bool fetch_on_miss) {
    return access(address, true, fetch_on_miss);
}

bool MetadataCache::contains(std::uint64_t address) const {
    const std::uint64_t line_no = address / config_.line_bytes;
    const std::size_t set = static_cast<std::size_t>(line_no % sets_);
    const std::uint64_t tag = line_no / sets_;
    const std::uint32_t sector =
        static_cast<std::uint32_t>((address % config_.line_bytes) / config_.sector_bytes);
    for (std::uint32_t w = 0; w < config_.ways; ++w) {
        const Line& l = lines_[set * config_.ways + w];
        if (l.valid && l.tag == tag) return (l.valid_sectors >> sector) & 1;
    }
    return false;
}

std::vector<Writeback> MetadataCache::flush() {
    std::vector<Writeback> out;
    for (std::size_t set = 0; set < sets_; ++set) {
        for (std::uint32_t w = 0; w < config_.ways; ++w) {
            Line& l = lines_[set * config_.ways + w];
            if (l.valid && l.dirty_sectors) {
                out.push_back(make_writeback(l, set));
                ++counters_.writebacks;
                counters_.writeback_bytes += out.back().bytes;
                l.dirty_sectors = 0;
            }
        }
    }
    return out;
}

std::size_t MetadataCache::resident_lines() const {
    std::size_t n = 0;
    for (const auto& l : lines_) n += l.valid;
    return n;
}

BonsaiTree::BonsaiTree(std::uint64_t protected_bytes, std::uint32_t block_bytes,
                       std::uint32_t arity, std::uint64_t vn_base, std::uint64_t tree_base,
                       std::uint32_t node_bytes)
    : arity_(arity), node_bytes_(node_bytes), vn_base_(vn_base) {
    if (block_bytes == 0 || arity < 2 || protected_bytes % block_bytes != 0)
        throw Error(ErrorCode::InvalidConfig, "bad integrity tree geometry");
    leaf_count_ = protected_bytes / block_bytes;
    depth_ = 0;
    for (std::uint64_t covered = 1; covered < leaf_count_; covered *= arity_) ++depth_;
    if (depth_ < 2)
        throw Error(ErrorCode::InvalidConfig, "protected memory too small for an integrity tree");

    level_base_.assign(depth_ + 1, 0);
    level_base_[1] = vn_base;
    std::uint64_t cursor = tree_base;
    for (std::uint32_t l = 2; l < depth_; ++l) {
        level_base_[l] = cursor;
        cursor += node_count(l) * node_bytes_;
    }
    end_ = cursor;
}

std::uint64_t BonsaiTree::node_count(std::uint32_t level) const {
    std::uint64_t span = 1;
    for (std::uint32_t l = 0; l < level; ++l) span *= arity_;
    return (leaf_count_ + span - 1) / span;
}

std::uint64_t BonsaiTree::node_index(std::uint32_t level, std::uint64_t block) const {
    for (std::uint32_t l = 0; l < level; ++l) block /= arity_;
    return block;
}

std::uint64_t BonsaiTree::node_address(std::uint32_t level, std::uint64_t index) const {
    if (level == 0 || level >= depth_)
        throw Error(ErrorCode::InvalidConfig, "tree level has no off-chip address");
    return level_base_[level] + index * node_bytes_;
}

std::optional<BonsaiTree::NodeId> BonsaiTree::locate(std::uint64_t address) const {
    for (std::uint32_t l = 1; l < depth_; ++l) {
        const std::uint64_t base = level_base_[l];
        const std::uint64_t size = node_count(l) * node_bytes_;
        if (address >= base && address < base + size)
            return NodeId{l, (address - base) / node_bytes_};
    }
    return std::nullopt;
}

}  // namespace seda::schemes
