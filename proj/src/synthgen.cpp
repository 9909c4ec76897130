#include "saros/synthgen.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "saros/errors.hpp"
#include "saros/rng.hpp"

namespace saros {

PlantedData generate_planted(const SynthSpec& spec) {
  if (spec.n_users == 0 || spec.n_items == 0 || spec.k_true == 0 ||
      spec.interactions_per_user == 0)
    throw std::invalid_argument("generate_planted: all counts must be >= 1");
  if (!(spec.click_noise >= 0.0 && spec.click_noise <= 1.0))
    throw std::invalid_argument("generate_planted: noise must be in [0, 1]");

  LatentModel truth = init_model(spec.n_users, spec.n_items, spec.k_true,
                                 {spec.seed, spec.factor_scale});
  // Separate stream from the factor init so both stay seed-stable.
  std::uint64_t sm = spec.seed ^ 0xa02bdbf7bb3c0a7ULL;
  Xoshiro256 rng(splitmix64_next(sm));

  std::vector<LabeledEvent> events;
  events.reserve(static_cast<std::size_t>(spec.n_users) *
                 spec.interactions_per_user);
  for (std::uint32_t u = 0; u < spec.n_users; ++u) {
    for (std::uint32_t t = 0; t < spec.interactions_per_user; ++t) {
      const std::uint32_t item =
          static_cast<std::uint32_t>(rng.bounded(spec.n_items));
      const double s = score(truth, u, item);
      const double p = 1.0 / (1.0 + std::exp(-s));
      bool clicked = rng.uniform01() < p;
      if (rng.uniform01() < spec.click_noise) clicked = !clicked;
      events.push_back({"u" + std::to_string(u), "i" + std::to_string(item),
                        clicked, static_cast<std::int64_t>(t)});
    }
  }
  // Pre-register the full vocabularies so dense ids match the planted
  // factor rows even for items that never got presented.
  Dataset ds;
  for (std::uint32_t i = 0; i < spec.n_items; ++i) {
    ds.item_index.emplace("i" + std::to_string(i), i);
    ds.item_ids.push_back("i" + std::to_string(i));
  }
  for (std::uint32_t u = 0; u < spec.n_users; ++u) {
    ds.user_index.emplace("u" + std::to_string(u), u);
    ds.user_ids.push_back("u" + std::to_string(u));
    ds.events_by_user.emplace_back();
  }
  for (const auto& ev : events) {
    const std::uint32_t u = ds.user_index.at(ev.user);
    ds.events_by_user[u].push_back(
        {u, ds.item_index.at(ev.item), ev.clicked, ev.timestamp});
  }
  return {std::move(ds), std::move(truth)};
}

Dataset inject_bots(const Dataset& dataset, const BotSpec& spec) {
  if (spec.n_bots == 0) return dataset;
  if (spec.target_items.empty())
    throw std::invalid_argument("inject_bots: target set is empty");
  if (spec.clicks_per_bot == 0)
    throw std::invalid_argument("inject_bots: clicks_per_bot must be >= 1");
  for (std::uint32_t t : spec.target_items)
    if (t >= dataset.n_items())
      throw std::invalid_argument("inject_bots: target item out of range");

  Dataset out = dataset;
  Xoshiro256 rng(spec.seed);
  const std::size_t n_items = dataset.n_items();
  for (std::uint32_t b = 0; b < spec.n_bots; ++b) {
    const std::string raw = "bot" + std::to_string(b);
    const auto uid = static_cast<std::uint32_t>(out.user_ids.size());
    out.user_index.emplace(raw, uid);
    out.user_ids.push_back(raw);
    std::vector<Interaction> stream;
    stream.reserve(2 * static_cast<std::size_t>(spec.clicks_per_bot));
    for (std::uint32_t c = 0; c < spec.clicks_per_bot; ++c) {
      const auto filler = static_cast<std::uint32_t>(rng.bounded(n_items));
      const std::uint32_t target =
          spec.target_items[rng.bounded(spec.target_items.size())];
      stream.push_back({uid, filler, false, static_cast<std::int64_t>(2 * c)});
      stream.push_back({uid, target, true, static_cast<std::int64_t>(2 * c + 1)});
    }
    out.events_by_user.push_back(std::move(stream));
  }
  return out;
}

void write_tsv(const Dataset& dataset, std::ostream& sink) {
  for (std::size_t u = 0; u < dataset.events_by_user.size(); ++u)
    for (const Interaction& ev : dataset.events_by_user[u])
      sink << dataset.user_ids[u] << '\t' << dataset.item_ids[ev.item] << '\t'
           << (ev.clicked ? 1 : 0) << '\t' << ev.timestamp << '\n';
  if (!sink) throw IoError("write_tsv: write failed");
}

void write_tsv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_tsv: cannot open " + path);
  write_tsv(dataset, out);
}

}  // namespace saros
