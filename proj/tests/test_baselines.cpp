#include <doctest.h>

#include <vector>

#include "saros/baselines.hpp"
#include "saros/errors.hpp"
#include "saros/loss.hpp"

using namespace saros;

namespace {

Dataset clicks_dataset(std::initializer_list<LabeledEvent> events) {
  return build_index(std::vector<LabeledEvent>{events});
}

}  // namespace

TEST_CASE("mostpop orders by click count then item id") {
  const auto ds = clicks_dataset({{"u", "a", true, 1},
                                  {"u", "a", true, 2},
                                  {"u", "b", true, 3},
                                  {"u", "c", false, 4}});
  const auto pop = train_mostpop(ds);
  CHECK(pop.click_counts[ds.item_index.at("a")] == 2);
  CHECK(pop.click_counts[ds.item_index.at("b")] == 1);
  CHECK(pop.click_counts[ds.item_index.at("c")] == 0);
  CHECK(pop.ranking[0] == ds.item_index.at("a"));
  CHECK(pop.ranking[1] == ds.item_index.at("b"));
  CHECK(pop.ranking[2] == ds.item_index.at("c"));
}

TEST_CASE("mostpop without clicks falls back to id order") {
  const auto ds = clicks_dataset({{"u", "a", false, 1},
                                  {"u", "b", false, 2},
                                  {"u", "c", false, 3}});
  const auto pop = train_mostpop(ds);
  for (std::uint64_t c : pop.click_counts) CHECK(c == 0);
  for (std::uint32_t i = 0; i < 3; ++i) CHECK(pop.ranking[i] == i);
}

TEST_CASE("mostpop tie-break is the ascending item id") {
  const auto ds = clicks_dataset({{"u", "x", true, 1},
                                  {"u", "y", true, 2},
                                  {"u", "z", true, 3}});
  const auto pop = train_mostpop(ds);
  CHECK(pop.ranking == std::vector<std::uint32_t>{0, 1, 2});
  // Twice the same input, same ordering.
  const auto again = train_mostpop(ds);
  CHECK(again.ranking == pop.ranking);
}

TEST_CASE("mostpop ignores timestamps entirely") {
  const auto a = clicks_dataset({{"u", "x", true, 1}, {"u", "y", true, 2}});
  const auto b = clicks_dataset({{"u", "x", true, 9}, {"u", "y", true, 3}});
  CHECK(train_mostpop(a).ranking == train_mostpop(b).ranking);
}

TEST_CASE("bpr with an explicit zero-step budget returns the initial model") {
  const auto ds = clicks_dataset({{"u", "a", true, 1}, {"u", "b", false, 2}});
  TrainConfig config;
  config.dim = 4;
  config.bpr_steps = 0;
  const InitSpec init{3, 0.2};
  const auto trained = train_bpr(ds, config, init);
  const auto reference = init_model(ds.n_users(), ds.n_items(), 4, init);
  CHECK(trained.bitwise_equal(reference));
}

TEST_CASE("bpr at a zero-filled init takes zero-gradient steps") {
  const auto ds = clicks_dataset({{"u", "a", true, 1}, {"u", "b", false, 2}});
  TrainConfig config;
  config.dim = 4;
  config.bpr_steps = 25;
  const InitSpec init{3, 0.0};
  const auto trained = train_bpr(ds, config, init);
  const auto reference = init_model(ds.n_users(), ds.n_items(), 4, init);
  CHECK(trained.bitwise_equal(reference));
}

TEST_CASE("one bpr step equals one 1x1-block sequential update") {
  const auto ds = clicks_dataset({{"u", "a", false, 1}, {"u", "b", true, 2}});
  TrainConfig config;
  config.dim = 2;
  config.step_eta = 0.1;
  config.reg_lambda = 0.02;
  config.bpr_steps = 1;
  config.seed = 5;
  const InitSpec init{11, 0.4};

  const auto trained = train_bpr(ds, config, init);

  // Hand computation through the shared gradient path: the only possible
  // triplet is (u, b, a).
  auto expected = init_model(ds.n_users(), ds.n_items(), 2, init);
  Block triplet{0, {ds.item_index.at("a")}, {ds.item_index.at("b")}};
  const auto grad = block_gradient(expected, triplet, {config.reg_lambda});
  for (const auto& [u, g] : grad.user_rows)
    for (std::size_t d = 0; d < 2; ++d) expected.user_row(u)[d] -= 0.1 * g[d];
  for (const auto& [i, g] : grad.item_rows)
    for (std::size_t d = 0; d < 2; ++d) expected.item_row(i)[d] -= 0.1 * g[d];
  CHECK(trained.bitwise_equal(expected));
}

TEST_CASE("bpr is deterministic under the seed") {
  std::vector<LabeledEvent> events;
  for (int u = 0; u < 10; ++u)
    for (int t = 0; t < 6; ++t)
      events.push_back({"u" + std::to_string(u), "i" + std::to_string(t),
                        t % 2 == 0, t});
  const auto ds = build_index(events);
  TrainConfig config;
  config.dim = 3;
  config.bpr_steps = 500;
  config.seed = 77;
  const InitSpec init{77, 0.1};
  const auto a = train_bpr(ds, config, init);
  const auto b = train_bpr(ds, config, init);
  CHECK(a.bitwise_equal(b));
}

TEST_CASE("bpr rejects corpora without eligible users") {
  const auto ds = clicks_dataset({{"u", "a", true, 1}, {"u", "b", true, 2}});
  TrainConfig config;
  config.dim = 2;
  CHECK_THROWS_AS(train_bpr(ds, config, InitSpec{}), ConfigError);
}
