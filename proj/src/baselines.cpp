#include "saros/baselines.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "saros/errors.hpp"
#include "saros/loss.hpp"
#include "saros/rng.hpp"

namespace saros {

PopularityModel train_mostpop(const Dataset& train) {
  PopularityModel model;
  model.click_counts.assign(train.n_items(), 0);
  for (const auto& seq : train.events_by_user)
    for (const Interaction& ev : seq)
      if (ev.clicked) ++model.click_counts[ev.item];
  model.ranking.resize(train.n_items());
  std::iota(model.ranking.begin(), model.ranking.end(), 0u);
  std::sort(model.ranking.begin(), model.ranking.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              if (model.click_counts[a] != model.click_counts[b])
                return model.click_counts[a] > model.click_counts[b];
              return a < b;
            });
  return model;
}

void save_popularity(const PopularityModel& model, const Dataset& train,
                     const std::string& path) {
  nlohmann::json counts = nlohmann::json::object();
  for (std::size_t i = 0; i < model.click_counts.size(); ++i)
    counts[train.item_ids[i]] = model.click_counts[i];
  std::ofstream out(path);
  if (!out) throw IoError("save_popularity: cannot open " + path);
  out << counts.dump(2) << '\n';
}

LatentModel train_bpr(const Dataset& train, const TrainConfig& config,
                      const InitSpec& init) {
  if (config.step_eta <= 0.0) throw ConfigError("bpr: step size must be > 0");
  if (config.dim == 0) throw ConfigError("bpr: dim must be >= 1");

  // Per-user pools of distinct clicked / non-clicked items, in sorted
  // order so sampling is deterministic.
  std::vector<std::vector<std::uint32_t>> positives(train.n_users());
  std::vector<std::vector<std::uint32_t>> negatives(train.n_users());
  std::uint64_t clicked_events = 0;
  for (std::size_t u = 0; u < train.events_by_user.size(); ++u) {
    std::set<std::uint32_t> pos, neg;
    for (const Interaction& ev : train.events_by_user[u]) {
      if (ev.clicked) {
        pos.insert(ev.item);
        ++clicked_events;
      } else {
        neg.insert(ev.item);
      }
    }
    positives[u].assign(pos.begin(), pos.end());
    negatives[u].assign(neg.begin(), neg.end());
  }
  std::vector<std::uint32_t> eligible;
  for (std::size_t u = 0; u < train.n_users(); ++u)
    if (!positives[u].empty() && !negatives[u].empty())
      eligible.push_back(static_cast<std::uint32_t>(u));
  if (eligible.empty())
    throw ConfigError("bpr: no user has both clicked and non-clicked items");

  const std::uint64_t steps = config.bpr_steps.value_or(
      static_cast<std::uint64_t>(config.epochs) * clicked_events);
  LatentModel model =
      init_model(train.n_users(), train.n_items(), config.dim, init);
  const LossParams params{config.reg_lambda};
  Xoshiro256 rng(config.seed);

  for (std::uint64_t s = 0; s < steps; ++s) {
    const std::uint32_t u = eligible[rng.bounded(eligible.size())];
    const std::uint32_t pos = positives[u][rng.bounded(positives[u].size())];
    const std::uint32_t neg = negatives[u][rng.bounded(negatives[u].size())];
    Block triplet{u, {neg}, {pos}};
    const SparseGradient grad = block_gradient(model, triplet, params);
    for (const auto& [uid, g] : grad.user_rows) {
      auto row = model.user_row(uid);
      for (std::size_t d = 0; d < g.size(); ++d)
        row[d] -= config.step_eta * g[d];
    }
    for (const auto& [iid, g] : grad.item_rows) {
      auto row = model.item_row(iid);
      for (std::size_t d = 0; d < g.size(); ++d)
        row[d] -= config.step_eta * g[d];
    }
  }
  return model;
}

}  // namespace saros
