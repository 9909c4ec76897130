#include <doctest.h>

#include <algorithm>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "saros/errors.hpp"
#include "saros/eval.hpp"
#include "saros/rng.hpp"

using namespace saros;

namespace {

// Fixed score table, independent of any trained model.
class TableScorer : public Scorer {
 public:
  explicit TableScorer(std::vector<std::vector<double>> scores)
      : scores_(std::move(scores)) {}
  double score_item(std::uint32_t user, std::uint32_t item) const override {
    return scores_[user][item];
  }
  std::size_t n_users() const override { return scores_.size(); }
  std::size_t n_items() const override { return scores_[0].size(); }

 private:
  std::vector<std::vector<double>> scores_;
};

Dataset indexed(std::initializer_list<LabeledEvent> events) {
  return build_index(std::vector<LabeledEvent>{events});
}

// Empty per-user histories over an item vocabulary of the given size, so
// rank_items excludes nothing.
Dataset empty_history(std::size_t n_users, std::size_t n_items) {
  Dataset ds;
  ds.events_by_user.resize(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    ds.user_ids.push_back("u" + std::to_string(u));
    ds.user_index[ds.user_ids.back()] = static_cast<std::uint32_t>(u);
  }
  for (std::size_t i = 0; i < n_items; ++i) {
    ds.item_ids.push_back("i" + std::to_string(i));
    ds.item_index[ds.item_ids.back()] = static_cast<std::uint32_t>(i);
  }
  return ds;
}

}  // namespace

TEST_CASE("rank_items sorts by score and breaks ties by item id") {
  const TableScorer scorer({{2.0, 5.0, 5.0}});
  const auto ranked = rank_items(scorer, 0, empty_history(1, 3));
  CHECK(ranked == std::vector<std::uint32_t>{1, 2, 0});
}

TEST_CASE("rank_items excludes the user's training clicks only") {
  // User clicked i1 and saw (but did not click) i0 during training.
  const auto train = indexed({{"u0", "i0", false, 1},
                              {"u0", "i1", true, 2},
                              {"u0", "i2", false, 3}});
  const TableScorer scorer({{1.0, 9.0, 2.0}});
  const auto ranked = rank_items(scorer, 0, train);
  // i1 is gone; non-clicked impressions stay rankable.
  CHECK(ranked == std::vector<std::uint32_t>{2, 0});
}

TEST_CASE("ndcg hand values") {
  const std::vector<std::uint32_t> ranked{7, 8, 3, 9, 1};
  SUBCASE("single relevant item at rank 3") {
    // DCG = 1/log2(4) = 0.5 and the ideal list has it at rank 1.
    CHECK(ndcg_at_k(ranked, {3}, 5) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("perfect prefix scores 1") {
    CHECK(ndcg_at_k(ranked, {7, 8}, 5) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("complete miss scores 0") {
    CHECK(ndcg_at_k(ranked, {42}, 5) == 0.0);
  }
  SUBCASE("empty relevant set is rejected") {
    CHECK_THROWS(ndcg_at_k(ranked, {}, 5));
  }
}

TEST_CASE("map hand values") {
  const std::vector<std::uint32_t> ranked{7, 8, 3, 9, 1};
  SUBCASE("single relevant item at rank 3") {
    CHECK(map_at_k(ranked, {3}, 5) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("hits at ranks 1 and 3") {
    // AP = (1/1 + 2/3) / min(5, 2).
    CHECK(map_at_k(ranked, {7, 3}, 5) ==
          doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-12));
  }
  SUBCASE("perfect prefix scores 1") {
    CHECK(map_at_k(ranked, {7, 8}, 2) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("complete miss scores 0") {
    CHECK(map_at_k(ranked, {42}, 5) == 0.0);
  }
}

TEST_CASE("metrics match the reference formulas on random rankings") {
  Xoshiro256 rng(404);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + rng.bounded(40);
    std::vector<std::uint32_t> ranked(n);
    for (std::size_t i = 0; i < n; ++i) ranked[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = n - 1; i > 0; --i)
      std::swap(ranked[i], ranked[rng.bounded(i + 1)]);
    std::unordered_set<std::uint32_t> relevant;
    const std::size_t n_rel = 1 + rng.bounded(n);
    while (relevant.size() < n_rel)
      relevant.insert(static_cast<std::uint32_t>(rng.bounded(n)));
    const std::size_t k = 1 + rng.bounded(n + 5);
    CHECK(ndcg_at_k(ranked, relevant, k) ==
          doctest::Approx(oracles::ndcg_reference(ranked, relevant, k))
              .epsilon(1e-10));
    CHECK(map_at_k(ranked, relevant, k) ==
          doctest::Approx(oracles::map_reference(ranked, relevant, k))
              .epsilon(1e-10));
  }
}

TEST_CASE("promoting a relevant item never hurts either metric") {
  Xoshiro256 rng(505);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 10;
    std::vector<std::uint32_t> ranked(n);
    for (std::size_t i = 0; i < n; ++i) ranked[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = n - 1; i > 0; --i)
      std::swap(ranked[i], ranked[rng.bounded(i + 1)]);
    std::unordered_set<std::uint32_t> relevant{
        static_cast<std::uint32_t>(rng.bounded(n)),
        static_cast<std::uint32_t>(rng.bounded(n))};
    // Find a relevant item with an irrelevant item somewhere above it.
    for (std::size_t pos = 1; pos < n; ++pos) {
      if (!relevant.count(ranked[pos])) continue;
      for (std::size_t above = 0; above < pos; ++above) {
        if (relevant.count(ranked[above])) continue;
        auto promoted = ranked;
        std::swap(promoted[above], promoted[pos]);
        for (std::size_t k = 1; k <= n; ++k) {
          CHECK(ndcg_at_k(promoted, relevant, k) >=
                ndcg_at_k(ranked, relevant, k) - 1e-12);
          CHECK(map_at_k(promoted, relevant, k) >=
                map_at_k(ranked, relevant, k) - 1e-12);
        }
      }
    }
  }
}

TEST_CASE("permutations below the cutoff do not change the metrics") {
  const std::vector<std::uint32_t> ranked{4, 0, 2, 1, 3, 5};
  std::vector<std::uint32_t> shuffled_tail = ranked;
  std::reverse(shuffled_tail.begin() + 3, shuffled_tail.end());
  const std::unordered_set<std::uint32_t> relevant{0, 3, 5};
  CHECK(ndcg_at_k(ranked, relevant, 3) ==
        ndcg_at_k(shuffled_tail, relevant, 3));
  CHECK(map_at_k(ranked, relevant, 3) == map_at_k(shuffled_tail, relevant, 3));
}

TEST_CASE("evaluate averages over users with clicked test items") {
  // Two items; u0's test click is its top-ranked candidate, u1's test
  // events carry no click, u2 has no test events at all.
  const auto full = indexed({{"u0", "i0", false, 1},
                             {"u0", "i1", false, 2},
                             {"u0", "i1", true, 3},
                             {"u1", "i0", false, 1},
                             {"u1", "i1", false, 2},
                             {"u1", "i0", false, 3},
                             {"u2", "i0", false, 1},
                             {"u2", "i1", true, 2}});
  auto [train, test] = temporal_split(full, 0.34);
  // Make u2 a no-test-events user explicitly.
  test.events_by_user[full.user_index.at("u2")].clear();

  const TableScorer scorer({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}});
  const std::vector<std::size_t> ks{1, 2};
  const auto report = evaluate(scorer, train, test, ks);
  CHECK(report.users_evaluated == 1);
  CHECK(report.users_excluded == 1);  // u1: test events but no clicks
  REQUIRE(report.per_k.size() == 2);
  CHECK(report.per_k[0].k == 1);
  CHECK(report.per_k[0].ndcg == doctest::Approx(1.0));
  CHECK(report.per_k[0].map == doctest::Approx(1.0));
}

TEST_CASE("evaluate rejects corpora with no evaluable user") {
  const auto full = indexed({{"u0", "i0", false, 1},
                             {"u0", "i1", false, 2},
                             {"u0", "i0", false, 3}});
  const auto [train, test] = temporal_split(full, 0.34);
  const TableScorer scorer({{1.0, 2.0}});
  const std::vector<std::size_t> ks{1};
  CHECK_THROWS_AS(evaluate(scorer, train, test, ks), DataError);
}

TEST_CASE("report serialization") {
  MetricsReport report;
  report.per_k = {{5, 0.25, 0.125}, {10, 0.5, 0.25}};
  report.users_evaluated = 7;
  report.users_excluded = 2;

  SUBCASE("json roundtrips through a parser") {
    const auto parsed = nlohmann::json::parse(report_to_json(report));
    CHECK(parsed["users_evaluated"] == 7);
    CHECK(parsed["users_excluded"] == 2);
    REQUIRE(parsed["metrics"].size() == 2);
    CHECK(parsed["metrics"][0]["k"] == 5);
    CHECK(parsed["metrics"][0]["ndcg"] == doctest::Approx(0.25));
    CHECK(parsed["metrics"][1]["map"] == doctest::Approx(0.25));
  }
  SUBCASE("csv has a header and one row per cutoff") {
    const std::string csv = report_to_csv(report, "toy", "saros-b");
    CHECK(csv.find("dataset,algorithm,K,NDCG,MAP,users_evaluated,"
                   "users_excluded") == 0);
    CHECK(csv.find("toy,saros-b,5,") != std::string::npos);
    CHECK(csv.find("toy,saros-b,10,") != std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  }
}
