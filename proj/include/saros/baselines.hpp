#pragma once

#include <cstdint>
#include <vector>

#include "saros/interactions.hpp"
#include "saros/model.hpp"
#include "saros/trainers.hpp"

namespace saros {

// Global popularity ranking: items ordered by (click count desc, id asc).
struct PopularityModel {
  std::vector<std::uint64_t> click_counts;  // indexed by dense item id
  std::vector<std::uint32_t> ranking;       // all items, most popular first
};

PopularityModel train_mostpop(const Dataset& train);

void save_popularity(const PopularityModel& model, const Dataset& train,
                     const std::string& path);

// Stochastic pairwise baseline: uniformly sampled (user, clicked,
// non-clicked) triplets, one SGD step each, sharing the block-gradient
// code path with the sequential trainers. The negative pool is the user's
// observed non-clicked items. Deterministic under config.seed.
LatentModel train_bpr(const Dataset& train, const TrainConfig& config,
                      const InitSpec& init);

}  // namespace saros
