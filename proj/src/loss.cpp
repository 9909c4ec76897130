#include "saros/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace saros {

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// 1 / (1 + exp(s)), the weight of the logistic gradient.
double sigmoid_neg(double s) {
  if (s > 0.0) {
    const double e = std::exp(-s);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(s));
}

double squared(std::span<const double> row) {
  double s = 0.0;
  for (double v : row) s += v * v;
  return s;
}

std::vector<double>& row_slot(std::map<std::uint32_t, std::vector<double>>& rows,
                              std::uint32_t id, std::size_t dim) {
  auto [it, fresh] = rows.try_emplace(id);
  if (fresh) it->second.assign(dim, 0.0);
  return it->second;
}

}  // namespace

double SparseGradient::squared_norm() const {
  double s = 0.0;
  for (const auto& [id, row] : user_rows)
    for (double v : row) s += v * v;
  for (const auto& [id, row] : item_rows)
    for (double v : row) s += v * v;
  return s;
}

double pair_loss(const LatentModel& model, std::size_t u, std::size_t pos,
                 std::size_t neg, const LossParams& params) {
  auto uu = model.user_row(u);
  auto ip = model.item_row(pos);
  auto in = model.item_row(neg);
  double s = 0.0;
  for (std::size_t d = 0; d < uu.size(); ++d) s += uu[d] * (ip[d] - in[d]);
  return softplus(-s) +
         params.reg_lambda * (squared(uu) + squared(ip) + squared(in));
}

double block_loss(const LatentModel& model, const Block& block,
                  const LossParams& params) {
  if (block.positives.empty() || block.negatives.empty())
    throw std::invalid_argument("block_loss: block has an empty side");
  double total = 0.0;
  for (std::uint32_t pos : block.positives)
    for (std::uint32_t neg : block.negatives)
      total += pair_loss(model, block.user, pos, neg, params);
  return total / (static_cast<double>(block.positives.size()) *
                  static_cast<double>(block.negatives.size()));
}

SparseGradient block_gradient(const LatentModel& model, const Block& block,
                              const LossParams& params) {
  if (block.positives.empty() || block.negatives.empty())
    throw std::invalid_argument("block_gradient: block has an empty side");
  const std::size_t k = model.dim();
  const double inv_pairs = 1.0 / (static_cast<double>(block.positives.size()) *
                                  static_cast<double>(block.negatives.size()));
  auto uu = model.user_row(block.user);

  SparseGradient grad;
  auto& g_user = row_slot(grad.user_rows, block.user, k);
  for (std::uint32_t pos : block.positives) {
    auto ip = model.item_row(pos);
    auto& g_pos = row_slot(grad.item_rows, pos, k);
    for (std::uint32_t neg : block.negatives) {
      auto in = model.item_row(neg);
      auto& g_neg = row_slot(grad.item_rows, neg, k);
      double s = 0.0;
      for (std::size_t d = 0; d < k; ++d) s += uu[d] * (ip[d] - in[d]);
      const double w = sigmoid_neg(s);
      const double reg2 = 2.0 * params.reg_lambda;
      for (std::size_t d = 0; d < k; ++d) {
        g_user[d] += inv_pairs * (-w * (ip[d] - in[d]) + reg2 * uu[d]);
        g_pos[d] += inv_pairs * (-w * uu[d] + reg2 * ip[d]);
        g_neg[d] += inv_pairs * (w * uu[d] + reg2 * in[d]);
      }
    }
  }
  return grad;
}

}  // namespace saros
