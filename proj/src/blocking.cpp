#include "saros/blocking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "saros/errors.hpp"

namespace saros {

std::vector<Block> extract_blocks(std::uint32_t user,
                                  std::span<const Interaction> stream) {
  for (std::size_t t = 1; t < stream.size(); ++t)
    if (stream[t].timestamp < stream[t - 1].timestamp)
      throw std::invalid_argument("extract_blocks: stream not time-sorted");

  std::vector<Block> blocks;
  Block current;
  current.user = user;
  bool in_positive_run = false;
  for (const Interaction& ev : stream) {
    if (!ev.clicked) {
      if (in_positive_run) {
        blocks.push_back(std::move(current));
        current = Block{};
        current.user = user;
        in_positive_run = false;
      }
      current.negatives.push_back(ev.item);
    } else {
      if (current.negatives.empty()) continue;  // leading click, discard
      in_positive_run = true;
      current.positives.push_back(ev.item);
    }
  }
  if (in_positive_run) blocks.push_back(std::move(current));
  return blocks;
}

std::vector<std::uint64_t> block_counts(const Dataset& dataset) {
  std::vector<std::uint64_t> counts(dataset.n_users(), 0);
  for (std::size_t u = 0; u < dataset.events_by_user.size(); ++u)
    counts[u] = extract_blocks(static_cast<std::uint32_t>(u),
                               dataset.events_by_user[u])
                    .size();
  return counts;
}

namespace {

// Nearest-rank order statistic: the ceil(q*n)-th smallest, 1-based.
std::uint64_t nearest_rank(const std::vector<std::uint64_t>& sorted, double q) {
  const std::size_t n = sorted.size();
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

}  // namespace

Thresholds estimate_thresholds(const std::vector<std::uint64_t>& counts,
                               double q_lo, double q_hi) {
  if (!(q_lo >= 0.0 && q_lo < q_hi && q_hi <= 1.0))
    throw std::invalid_argument("estimate_thresholds: need 0 <= q_lo < q_hi <= 1");
  std::vector<std::uint64_t> positive;
  positive.reserve(counts.size());
  for (std::uint64_t c : counts)
    if (c > 0) positive.push_back(c);
  if (positive.empty())
    throw DataError("estimate_thresholds: every user has zero blocks");
  std::sort(positive.begin(), positive.end());
  Thresholds th;
  th.lower = std::max<std::uint64_t>(1, nearest_rank(positive, q_lo));
  th.upper = nearest_rank(positive, q_hi);
  th.upper = std::max(th.upper, th.lower);
  return th;
}

}  // namespace saros
