#include "saros/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "saros/errors.hpp"
#include "saros/rng.hpp"

namespace saros {

namespace {

double resolve_step(const TrainConfig& config, const Dataset& train) {
  if (config.step_eta <= 0.0)
    throw ConfigError("train: step size must be > 0");
  if (config.step_policy == StepPolicy::Constant) return config.step_eta;
  std::size_t active_users = 0;
  for (const auto& seq : train.events_by_user)
    if (!seq.empty()) ++active_users;
  if (active_users == 0) throw ConfigError("train: no training users");
  return config.step_eta / std::sqrt(static_cast<double>(active_users));
}

void validate_config(const TrainConfig& config) {
  if (!(config.momentum_gamma >= 0.0 && config.momentum_gamma < 1.0))
    throw ConfigError("train: momentum_gamma must be in [0, 1)");
  if (config.reg_lambda < 0.0)
    throw ConfigError("train: reg_lambda must be >= 0");
  if (config.epochs == 0) throw ConfigError("train: epochs must be >= 1");
  if (config.dim == 0) throw ConfigError("train: dim must be >= 1");
}

std::vector<std::vector<Block>> blocks_per_user(const Dataset& train) {
  std::vector<std::vector<Block>> all(train.n_users());
  for (std::size_t u = 0; u < train.events_by_user.size(); ++u)
    all[u] = extract_blocks(static_cast<std::uint32_t>(u),
                            train.events_by_user[u]);
  return all;
}

void finish_epoch(Diagnostics& diag, std::size_t epoch_start) {
  const std::size_t n = diag.trace.size() - epoch_start;
  double mean = 0.0;
  if (n > 0) {
    for (std::size_t i = epoch_start; i < diag.trace.size(); ++i)
      mean += diag.trace[i].loss;
    mean /= static_cast<double>(n);
  }
  diag.epoch_mean_loss.push_back(mean);
}

}  // namespace

void UserCheckpoint::touch_user(std::uint32_t u) {
  auto [it, fresh] = saved_users_.try_emplace(u);
  if (fresh) {
    auto row = model_->user_row(u);
    it->second.assign(row.begin(), row.end());
  }
}

void UserCheckpoint::touch_item(std::uint32_t i) {
  auto [it, fresh] = saved_items_.try_emplace(i);
  if (fresh) {
    auto row = model_->item_row(i);
    it->second.assign(row.begin(), row.end());
  }
}

void UserCheckpoint::rollback() {
  for (const auto& [u, saved] : saved_users_) {
    auto row = model_->user_row(u);
    std::memcpy(row.data(), saved.data(), saved.size() * sizeof(double));
  }
  for (const auto& [i, saved] : saved_items_) {
    auto row = model_->item_row(i);
    std::memcpy(row.data(), saved.data(), saved.size() * sizeof(double));
  }
}

std::vector<std::uint32_t> epoch_visit_order(std::size_t n_users,
                                             std::uint64_t seed,
                                             std::uint32_t epoch,
                                             bool shuffle) {
  std::vector<std::uint32_t> order(n_users);
  std::iota(order.begin(), order.end(), 0u);
  if (!shuffle || n_users < 2) return order;
  // Derive an epoch-specific stream from the run seed.
  std::uint64_t sm = seed;
  std::uint64_t derived = splitmix64_next(sm);
  for (std::uint32_t e = 0; e < epoch; ++e) derived = splitmix64_next(sm);
  Xoshiro256 rng(derived);
  for (std::size_t i = n_users - 1; i > 0; --i) {
    const std::size_t j = rng.bounded(i + 1);
    std::swap(order[i], order[j]);
  }
  return order;
}

TrainResult train_saros_b(const Dataset& train, const TrainConfig& config,
                          const InitSpec& init) {
  validate_config(config);
  const double step = resolve_step(config, train);

  Diagnostics diag;
  diag.user_block_counts = block_counts(train);
  diag.effective_step = step;
  if (config.explicit_thresholds) {
    diag.resolved_thresholds = *config.explicit_thresholds;
    if (diag.resolved_thresholds.lower == 0 ||
        diag.resolved_thresholds.lower > diag.resolved_thresholds.upper)
      throw ConfigError("train: need 1 <= b <= B");
  } else {
    try {
      diag.resolved_thresholds = estimate_thresholds(
          diag.user_block_counts, config.threshold_q_lo, config.threshold_q_hi);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("train: cannot estimate thresholds: ") +
                        e.what());
    }
  }
  const Thresholds th = diag.resolved_thresholds;

  LatentModel model =
      init_model(train.n_users(), train.n_items(), config.dim, init);
  const auto blocks = blocks_per_user(train);
  const LossParams params{config.reg_lambda};

  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    const std::size_t epoch_start = diag.trace.size();
    const auto order = epoch_visit_order(train.n_users(), config.seed, epoch,
                                         config.shuffle_users);
    for (std::uint32_t u : order) {
      const auto& user_blocks = blocks[u];
      if (user_blocks.empty()) continue;
      UserCheckpoint checkpoint(model);
      std::uint32_t block_index = 0;
      for (const Block& block : user_blocks) {
        const SparseGradient grad = block_gradient(model, block, params);
        diag.trace.push_back({epoch, u, block_index++, grad.squared_norm(),
                              block_loss(model, block, params)});
        for (const auto& [uid, g] : grad.user_rows) {
          checkpoint.touch_user(uid);
          auto row = model.user_row(uid);
          for (std::size_t d = 0; d < g.size(); ++d) row[d] -= step * g[d];
        }
        for (const auto& [iid, g] : grad.item_rows) {
          checkpoint.touch_item(iid);
          auto row = model.item_row(iid);
          for (std::size_t d = 0; d < g.size(); ++d) row[d] -= step * g[d];
        }
      }
      const std::uint64_t count = user_blocks.size();
      if (count < th.lower || count > th.upper) {
        checkpoint.rollback();
        if (count < th.lower)
          ++diag.users_discarded_below;
        else
          ++diag.users_discarded_above;
      }
    }
    finish_epoch(diag, epoch_start);
  }
  return {std::move(model), std::move(diag)};
}

TrainResult train_saros_m(const Dataset& train, const TrainConfig& config,
                          const InitSpec& init) {
  validate_config(config);
  const double step = resolve_step(config, train);
  const double gamma = config.momentum_gamma;

  Diagnostics diag;
  diag.user_block_counts = block_counts(train);
  diag.effective_step = step;

  LatentModel model =
      init_model(train.n_users(), train.n_items(), config.dim, init);
  const auto blocks = blocks_per_user(train);
  const LossParams params{config.reg_lambda};
  const std::size_t k = config.dim;

  // Sparse momentum buffer over ever-touched rows; absent rows are zero.
  // It is zero at training start and carried across blocks and users.
  std::map<std::uint32_t, std::vector<double>> v_user, v_item;

  // Folds one block gradient into the buffer (v <- gamma*v + (1-gamma)*g),
  // decays rows the gradient does not touch, applies w <- w - step*v, and
  // drops rows that decayed to exactly zero (a no-op update).
  auto fold_and_apply = [&](std::map<std::uint32_t, std::vector<double>>& vmap,
                            const std::map<std::uint32_t, std::vector<double>>& gmap,
                            bool user_side) {
    for (const auto& [id, g] : gmap) {
      auto [it, fresh] = vmap.try_emplace(id);
      if (fresh) it->second.assign(k, 0.0);
      auto& v = it->second;
      for (std::size_t d = 0; d < k; ++d)
        v[d] = gamma * v[d] + (1.0 - gamma) * g[d];
    }
    for (auto it = vmap.begin(); it != vmap.end();) {
      if (!gmap.contains(it->first))
        for (double& v : it->second) v *= gamma;
      const bool all_zero =
          std::all_of(it->second.begin(), it->second.end(),
                      [](double v) { return v == 0.0; });
      if (all_zero) {
        it = vmap.erase(it);
        continue;
      }
      auto row = user_side ? model.user_row(it->first) : model.item_row(it->first);
      for (std::size_t d = 0; d < k; ++d) row[d] -= step * it->second[d];
      ++it;
    }
  };

  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    const std::size_t epoch_start = diag.trace.size();
    const auto order = epoch_visit_order(train.n_users(), config.seed, epoch,
                                         config.shuffle_users);
    for (std::uint32_t u : order) {
      std::uint32_t block_index = 0;
      for (const Block& block : blocks[u]) {
        const SparseGradient grad = block_gradient(model, block, params);
        diag.trace.push_back({epoch, u, block_index++, grad.squared_norm(),
                              block_loss(model, block, params)});
        fold_and_apply(v_user, grad.user_rows, true);
        fold_and_apply(v_item, grad.item_rows, false);
      }
    }
    finish_epoch(diag, epoch_start);
  }
  return {std::move(model), std::move(diag)};
}

GradNormTrend grad_norm_trend(std::span<const double> grad_sq_norms) {
  const std::size_t n = grad_sq_norms.size();
  if (n < 100)
    throw std::invalid_argument("grad_norm_trend: need at least 100 records");

  std::vector<double> running_min(n);
  double m = grad_sq_norms[0];
  for (std::size_t i = 0; i < n; ++i) {
    m = std::min(m, grad_sq_norms[i]);
    running_min[i] = m;
  }

  GradNormTrend trend;
  trend.min_at_quarter = running_min[n / 4 - 1];
  trend.min_at_half = running_min[n / 2 - 1];
  trend.min_at_end = running_min[n - 1];

  // Least-squares slope of log(running min) against log(position).
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(static_cast<double>(i + 1));
    const double y = std::log(std::max(running_min[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double nn = static_cast<double>(n);
  const double denom = nn * sxx - sx * sx;
  trend.loglog_slope = denom != 0.0 ? (nn * sxy - sx * sy) / denom : 0.0;
  return trend;
}

GradNormTrend grad_norm_trend(const Diagnostics& diagnostics) {
  std::vector<double> norms;
  norms.reserve(diagnostics.trace.size());
  for (const auto& rec : diagnostics.trace) norms.push_back(rec.grad_sq_norm);
  return grad_norm_trend(norms);
}

}  // namespace saros
