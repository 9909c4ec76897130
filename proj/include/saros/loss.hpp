#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "saros/blocking.hpp"
#include "saros/model.hpp"

namespace saros {

struct LossParams {
  double reg_lambda = 0.0;  // L2 weight on the three rows of each pair
};

// Gradient of a block loss: touches exactly the user row and the block's
// item rows. Ordered maps keep update application deterministic.
struct SparseGradient {
  std::map<std::uint32_t, std::vector<double>> user_rows;
  std::map<std::uint32_t, std::vector<double>> item_rows;

  double squared_norm() const;
};

// Pairwise logistic ranking loss with per-pair L2 regularization of the
// three participating rows; pos is the preferred item. Overflow-safe for
// arbitrarily large score differences.
double pair_loss(const LatentModel& model, std::size_t u, std::size_t pos,
                 std::size_t neg, const LossParams& params);

// Mean of pair_loss over the |positives| x |negatives| pairs of the block.
double block_loss(const LatentModel& model, const Block& block,
                  const LossParams& params);

// Exact analytic gradient of block_loss. Rows outside the block are
// implicitly zero. A repeated item accumulates once per pair it joins,
// regularizer included.
SparseGradient block_gradient(const LatentModel& model, const Block& block,
                              const LossParams& params);

}  // namespace saros
