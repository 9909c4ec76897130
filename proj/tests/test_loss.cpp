#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "saros/loss.hpp"
#include "saros/model.hpp"
#include "saros/rng.hpp"

using namespace saros;

namespace {

void set_row(std::span<double> row, std::initializer_list<double> values) {
  std::size_t d = 0;
  for (double v : values) row[d++] = v;
}

Block random_block(Xoshiro256& rng, std::size_t n_items, std::uint32_t user) {
  Block block;
  block.user = user;
  const std::size_t n_neg = 1 + rng.bounded(5);
  const std::size_t n_pos = 1 + rng.bounded(5);
  for (std::size_t j = 0; j < n_neg; ++j)
    block.negatives.push_back(static_cast<std::uint32_t>(rng.bounded(n_items)));
  for (std::size_t j = 0; j < n_pos; ++j)
    block.positives.push_back(static_cast<std::uint32_t>(rng.bounded(n_items)));
  return block;
}

// Central finite differences of block_loss over every touched coordinate.
void check_gradient_fd(LatentModel& model, const Block& block,
                       const LossParams& params) {
  const double h = 1e-6;
  const auto grad = block_gradient(model, block, params);
  auto check_coord = [&](double& coord, double analytic) {
    const double saved = coord;
    coord = saved + h;
    const double up = block_loss(model, block, params);
    coord = saved - h;
    const double down = block_loss(model, block, params);
    coord = saved;
    const double fd = (up - down) / (2.0 * h);
    const double rel = std::abs(analytic - fd) / (std::abs(analytic) + 1e-8);
    CHECK(rel < 1e-5);
  };
  for (const auto& [u, g] : grad.user_rows)
    for (std::size_t d = 0; d < g.size(); ++d)
      check_coord(model.user_row(u)[d], g[d]);
  for (const auto& [i, g] : grad.item_rows)
    for (std::size_t d = 0; d < g.size(); ++d)
      check_coord(model.item_row(i)[d], g[d]);
}

}  // namespace

TEST_CASE("pair_loss at a zero model is log 2") {
  const auto model = init_model(2, 3, 4, {0, 0.0});
  CHECK(pair_loss(model, 0, 1, 2, {0.0}) ==
        doctest::Approx(0.6931471805599453).epsilon(1e-15));
}

TEST_CASE("pair_loss matches hand-computed values") {
  auto model = init_model(1, 2, 2, {0, 0.0});
  set_row(model.user_row(0), {1.0, 0.0});
  set_row(model.item_row(0), {1.0, 0.0});
  set_row(model.item_row(1), {0.0, 0.0});
  CHECK(pair_loss(model, 0, 0, 1, {0.0}) ==
        doctest::Approx(std::log1p(std::exp(-1.0))).epsilon(1e-12));
  CHECK(pair_loss(model, 0, 0, 1, {0.1}) ==
        doctest::Approx(std::log1p(std::exp(-1.0)) + 0.2).epsilon(1e-12));
}

TEST_CASE("pair_loss is nonnegative and positive under regularization") {
  Xoshiro256 rng(8);
  auto model = init_model(4, 6, 3, {8, 0.7});
  for (int trial = 0; trial < 100; ++trial) {
    const auto u = rng.bounded(4);
    const auto i = rng.bounded(6);
    const auto j = rng.bounded(6);
    CHECK(pair_loss(model, u, i, j, {0.0}) >= 0.0);
    CHECK(pair_loss(model, u, i, j, {0.01}) > 0.0);
  }
}

TEST_CASE("swapping the pair mirrors the logistic term") {
  auto model = init_model(1, 2, 3, {3, 0.5});
  const double s = score(model, 0, 0) - score(model, 0, 1);
  const double forward = pair_loss(model, 0, 0, 1, {0.0});
  const double swapped = pair_loss(model, 0, 1, 0, {0.0});
  CHECK(forward == doctest::Approx(std::log1p(std::exp(-s))).epsilon(1e-12));
  CHECK(swapped == doctest::Approx(std::log1p(std::exp(s))).epsilon(1e-12));
}

TEST_CASE("no overflow for huge score differences") {
  auto model = init_model(1, 2, 1, {0, 0.0});
  model.user_row(0)[0] = 100.0;
  model.item_row(0)[0] = 100.0;
  model.item_row(1)[0] = -100.0;  // score difference 2e4
  CHECK(std::isfinite(pair_loss(model, 0, 0, 1, {0.0})));
  CHECK(std::isfinite(pair_loss(model, 0, 1, 0, {0.0})));
  Block block{0, {0}, {1}};
  const auto grad = block_gradient(model, block, {0.0});
  for (const auto& [id, g] : grad.user_rows)
    for (double v : g) CHECK(std::isfinite(v));
  for (const auto& [id, g] : grad.item_rows)
    for (double v : g) CHECK(std::isfinite(v));
}

TEST_CASE("block_loss degenerates to pair_loss on a 1x1 block") {
  const auto model = init_model(2, 4, 3, {5, 0.4});
  Block block{1, {2}, {3}};
  CHECK(block_loss(model, block, {0.05}) ==
        doctest::Approx(pair_loss(model, 1, 3, 2, {0.05})).epsilon(1e-15));
}

TEST_CASE("block_loss of a zero model is log 2 regardless of shape") {
  const auto model = init_model(2, 6, 4, {0, 0.0});
  Block block{0, {0, 1, 2}, {3, 4}};
  CHECK(block_loss(model, block, {0.0}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("block_loss matches a naive double-loop oracle") {
  const auto model = init_model(3, 8, 4, {21, 0.6});
  Block block{2, {1, 4, 6}, {0, 7}};
  const LossParams params{0.03};
  double expected = 0.0;
  for (std::uint32_t i : block.positives)
    for (std::uint32_t j : block.negatives)
      expected += pair_loss(model, 2, i, j, params);
  expected /= 6.0;
  CHECK(block_loss(model, block, params) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("block_loss is invariant to within-side permutations") {
  const auto model = init_model(2, 10, 5, {77, 0.5});
  Block block{0, {1, 3, 5, 7}, {2, 4, 6}};
  Block permuted{0, {7, 1, 5, 3}, {6, 2, 4}};
  CHECK(block_loss(model, block, {0.02}) ==
        doctest::Approx(block_loss(model, permuted, {0.02})).epsilon(1e-14));
}

TEST_CASE("empty sides are rejected") {
  const auto model = init_model(1, 2, 2, {0, 0.1});
  Block no_neg{0, {}, {1}};
  Block no_pos{0, {0}, {}};
  CHECK_THROWS_AS(block_loss(model, no_neg, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(block_gradient(model, no_pos, {0.0}), std::invalid_argument);
}

TEST_CASE("gradient at a zero model is all zeros without regularization") {
  const auto model = init_model(1, 2, 3, {0, 0.0});
  Block block{0, {0}, {1}};
  const auto grad = block_gradient(model, block, {0.0});
  for (const auto& [id, g] : grad.user_rows)
    for (double v : g) CHECK(v == 0.0);
  for (const auto& [id, g] : grad.item_rows)
    for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("gradient touches exactly the block's rows") {
  const auto model = init_model(5, 10, 3, {4, 0.3});
  Block block{3, {2, 4}, {7}};
  const auto grad = block_gradient(model, block, {0.01});
  CHECK(grad.user_rows.size() == 1);
  CHECK(grad.user_rows.contains(3));
  CHECK(grad.item_rows.size() == 3);
  CHECK(grad.item_rows.contains(2));
  CHECK(grad.item_rows.contains(4));
  CHECK(grad.item_rows.contains(7));
}

TEST_CASE("analytic gradient agrees with central finite differences") {
  Xoshiro256 rng(1234);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + rng.bounded(8);
    auto model = init_model(3, 12, k, {rng.next(), 0.8});
    const auto block = random_block(rng, 12, static_cast<std::uint32_t>(rng.bounded(3)));
    const LossParams params{rng.bounded(2) == 0 ? 0.0 : 0.1 * rng.uniform01()};
    check_gradient_fd(model, block, params);
  }
}

TEST_CASE("repeated items accumulate once per pair, finite differences included") {
  auto model = init_model(1, 4, 3, {9, 0.5});
  Block block{0, {1, 1, 2}, {3, 3}};  // duplicates on both sides
  check_gradient_fd(model, block, {0.07});
}

TEST_CASE("large regularization dominates the gradient") {
  auto model = init_model(2, 6, 4, {6, 0.9});
  Block block{1, {0, 2}, {4}};
  const double lambda = 1e3;
  const auto grad = block_gradient(model, block, {lambda});
  // Logistic term per coordinate is bounded by the factor magnitudes (~1);
  // the regularization term is ~2e3 times the row entry.
  for (const auto& [u, g] : grad.user_rows) {
    for (std::size_t d = 0; d < g.size(); ++d) {
      const double reg_term = 2.0 * lambda * model.user_row(u)[d];
      // The logistic part is bounded by ~2 here, so 1% dominance needs a
      // comfortably larger regularization term.
      if (std::abs(reg_term) > 200.0)
        CHECK(std::abs(g[d] - reg_term) / std::abs(reg_term) < 0.01);
    }
  }
}
