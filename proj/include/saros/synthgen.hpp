#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "saros/interactions.hpp"
#include "saros/model.hpp"

namespace saros {

// Planted-factor generator: click labels are drawn from the logistic
// probability of known ground-truth factors, then flipped with the given
// noise probability.
struct SynthSpec {
  std::uint32_t n_users = 100;
  std::uint32_t n_items = 50;
  std::uint32_t k_true = 4;
  std::uint32_t interactions_per_user = 20;
  double click_noise = 0.0;
  std::uint64_t seed = 0;
  double factor_scale = 1.5;  // half-width of the true-factor init
};

struct BotSpec {
  std::uint32_t n_bots = 0;
  std::vector<std::uint32_t> target_items;
  std::uint32_t clicks_per_bot = 100;
  std::uint64_t seed = 0;
};

struct PlantedData {
  Dataset data;
  LatentModel true_factors;
};

PlantedData generate_planted(const SynthSpec& spec);

// Appends bot users whose streams alternate one random non-clicked item
// with one clicked target item, so each bot forms exactly clicks_per_bot
// blocks. Organic users' data is untouched.
Dataset inject_bots(const Dataset& dataset, const BotSpec& spec);

// Standard ingestion schema: user <tab> item <tab> click <tab> timestamp.
void write_tsv(const Dataset& dataset, std::ostream& sink);
void write_tsv(const Dataset& dataset, const std::string& path);

}  // namespace saros
