#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "saros/baselines.hpp"
#include "saros/interactions.hpp"
#include "saros/model.hpp"

namespace saros {

// Anything that assigns a score to a (user, item) pair.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual double score_item(std::uint32_t user, std::uint32_t item) const = 0;
  virtual std::size_t n_users() const = 0;
  virtual std::size_t n_items() const = 0;
};

class FactorScorer : public Scorer {
 public:
  explicit FactorScorer(const LatentModel& model) : model_(model) {}
  double score_item(std::uint32_t user, std::uint32_t item) const override {
    return score(model_, user, item);
  }
  std::size_t n_users() const override { return model_.n_users(); }
  std::size_t n_items() const override { return model_.n_items(); }

 private:
  const LatentModel& model_;
};

// Popularity score is user-independent.
class PopularityScorer : public Scorer {
 public:
  PopularityScorer(const PopularityModel& model, std::size_t n_users)
      : model_(model), n_users_(n_users) {}
  double score_item(std::uint32_t, std::uint32_t item) const override {
    return static_cast<double>(model_.click_counts[item]);
  }
  std::size_t n_users() const override { return n_users_; }
  std::size_t n_items() const override { return model_.click_counts.size(); }

 private:
  const PopularityModel& model_;
  std::size_t n_users_;
};

// All items except the user's train-time clicks, sorted by
// (score desc, item id asc).
std::vector<std::uint32_t> rank_items(const Scorer& scorer, std::uint32_t user,
                                      const Dataset& train);

// Binary-relevance NDCG with 1/log2(rank+1) discounting; the ideal prefix
// normalizes. Throws on an empty relevant set.
double ndcg_at_k(std::span<const std::uint32_t> ranked,
                 const std::unordered_set<std::uint32_t>& relevant,
                 std::size_t k);

// Average precision truncated at K, normalized by min(K, |relevant|).
double map_at_k(std::span<const std::uint32_t> ranked,
                const std::unordered_set<std::uint32_t>& relevant,
                std::size_t k);

struct MetricsAtK {
  std::size_t k = 0;
  double ndcg = 0.0;
  double map = 0.0;
};

struct MetricsReport {
  std::vector<MetricsAtK> per_k;
  std::uint64_t users_evaluated = 0;
  std::uint64_t users_excluded = 0;  // no clicked test items
};

// Means over users that have at least one clicked test item; relevance is
// the user's clicked test items.
MetricsReport evaluate(const Scorer& scorer, const Dataset& train,
                       const Dataset& test, std::span<const std::size_t> ks);

std::string report_to_json(const MetricsReport& report);
// One CSV row per K: dataset,algorithm,K,NDCG,MAP,users_evaluated,users_excluded
std::string report_to_csv(const MetricsReport& report,
                          const std::string& dataset_name,
                          const std::string& algorithm_name);

}  // namespace saros
