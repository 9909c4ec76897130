#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "saros/interactions.hpp"

namespace saros {

// One user's run of non-clicked items followed by the run of clicked
// items that closes it. Both sides are non-empty and every negative
// precedes every positive in the source stream.
struct Block {
  std::uint32_t user = 0;
  std::vector<std::uint32_t> negatives;
  std::vector<std::uint32_t> positives;
};

// Per-user block-count bounds. Users whose count falls outside
// [lower, upper] have their updates discarded by the bounded trainer.
struct Thresholds {
  std::uint64_t lower = 1;
  std::uint64_t upper = UINT64_MAX;
};

// Greedy left-to-right scan over a time-sorted stream. Leading clicks and
// a trailing run of non-clicks are discarded; no degenerate blocks.
std::vector<Block> extract_blocks(std::uint32_t user,
                                  std::span<const Interaction> stream);

// Block count per user, zero-block users included.
std::vector<std::uint64_t> block_counts(const Dataset& dataset);

// Nearest-rank quantiles of the positive counts (zero-block users are
// excluded). lower is clamped to >= 1; lower <= upper always holds.
Thresholds estimate_thresholds(const std::vector<std::uint64_t>& counts,
                               double q_lo, double q_hi);

}  // namespace saros
