#include "saros/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "saros/errors.hpp"

namespace saros {

std::vector<std::uint32_t> rank_items(const Scorer& scorer, std::uint32_t user,
                                      const Dataset& train) {
  if (user >= scorer.n_users() || user >= train.n_users())
    throw std::invalid_argument("rank_items: unknown user");
  std::unordered_set<std::uint32_t> seen_clicks;
  for (const Interaction& ev : train.events_by_user[user])
    if (ev.clicked) seen_clicks.insert(ev.item);

  std::vector<std::uint32_t> candidates;
  candidates.reserve(scorer.n_items());
  for (std::uint32_t i = 0; i < scorer.n_items(); ++i)
    if (!seen_clicks.contains(i)) candidates.push_back(i);

  std::vector<double> scores(scorer.n_items(), 0.0);
  for (std::uint32_t i : candidates) scores[i] = scorer.score_item(user, i);
  std::sort(candidates.begin(), candidates.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              if (scores[a] != scores[b]) return scores[a] > scores[b];
              return a < b;
            });
  return candidates;
}

double ndcg_at_k(std::span<const std::uint32_t> ranked,
                 const std::unordered_set<std::uint32_t>& relevant,
                 std::size_t k) {
  if (k == 0) throw std::invalid_argument("ndcg_at_k: k must be >= 1");
  if (relevant.empty()) throw std::invalid_argument("ndcg_at_k: empty relevant set");
  double dcg = 0.0;
  const std::size_t depth = std::min(k, ranked.size());
  for (std::size_t r = 0; r < depth; ++r)
    if (relevant.contains(ranked[r]))
      dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  double idcg = 0.0;
  const std::size_t ideal = std::min(k, relevant.size());
  for (std::size_t r = 0; r < ideal; ++r)
    idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  return dcg / idcg;
}

double map_at_k(std::span<const std::uint32_t> ranked,
                const std::unordered_set<std::uint32_t>& relevant,
                std::size_t k) {
  if (k == 0) throw std::invalid_argument("map_at_k: k must be >= 1");
  if (relevant.empty()) throw std::invalid_argument("map_at_k: empty relevant set");
  double sum = 0.0;
  std::size_t hits = 0;
  const std::size_t depth = std::min(k, ranked.size());
  for (std::size_t r = 0; r < depth; ++r) {
    if (relevant.contains(ranked[r])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  return sum / static_cast<double>(std::min(k, relevant.size()));
}

MetricsReport evaluate(const Scorer& scorer, const Dataset& train,
                       const Dataset& test, std::span<const std::size_t> ks) {
  MetricsReport report;
  for (std::size_t k : ks) report.per_k.push_back({k, 0.0, 0.0});

  for (std::uint32_t u = 0; u < test.n_users(); ++u) {
    std::unordered_set<std::uint32_t> relevant;
    for (const Interaction& ev : test.events_by_user[u])
      if (ev.clicked) relevant.insert(ev.item);
    if (test.events_by_user[u].empty()) continue;  // dropped by the split
    if (relevant.empty()) {
      ++report.users_excluded;
      continue;
    }
    const auto ranked = rank_items(scorer, u, train);
    for (auto& m : report.per_k) {
      m.ndcg += ndcg_at_k(ranked, relevant, m.k);
      m.map += map_at_k(ranked, relevant, m.k);
    }
    ++report.users_evaluated;
  }
  if (report.users_evaluated == 0)
    throw DataError("evaluate: no user has clicked test items");
  for (auto& m : report.per_k) {
    m.ndcg /= static_cast<double>(report.users_evaluated);
    m.map /= static_cast<double>(report.users_evaluated);
  }
  return report;
}

std::string report_to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["users_evaluated"] = report.users_evaluated;
  j["users_excluded"] = report.users_excluded;
  j["metrics"] = nlohmann::json::array();
  for (const auto& m : report.per_k)
    j["metrics"].push_back({{"k", m.k}, {"ndcg", m.ndcg}, {"map", m.map}});
  return j.dump(2) + "\n";
}

std::string report_to_csv(const MetricsReport& report,
                          const std::string& dataset_name,
                          const std::string& algorithm_name) {
  std::ostringstream out;
  out << "dataset,algorithm,K,NDCG,MAP,users_evaluated,users_excluded\n";
  out.precision(10);
  for (const auto& m : report.per_k)
    out << dataset_name << ',' << algorithm_name << ',' << m.k << ','
        << m.ndcg << ',' << m.map << ',' << report.users_evaluated << ','
        << report.users_excluded << '\n';
  return out.str();
}

}  // namespace saros
