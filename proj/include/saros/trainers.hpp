#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "saros/blocking.hpp"
#include "saros/interactions.hpp"
#include "saros/loss.hpp"
#include "saros/model.hpp"

namespace saros {

enum class Algorithm { SarosB, SarosM, Bpr, MostPop };

enum class StepPolicy {
  Constant,     // step_eta used as-is
  COverSqrtN,   // effective step = step_eta / sqrt(#training users)
};

struct TrainConfig {
  Algorithm algorithm = Algorithm::SarosB;
  std::uint32_t dim = 16;  // latent dimension k
  double step_eta = 0.05;  // eta for the bounded variant, alpha for momentum
  StepPolicy step_policy = StepPolicy::Constant;
  double momentum_gamma = 0.0;  // in [0, 1)
  double reg_lambda = 0.0;
  std::optional<Thresholds> explicit_thresholds;  // else estimated below
  double threshold_q_lo = 0.1;
  double threshold_q_hi = 0.9;
  std::uint32_t epochs = 1;
  std::uint64_t seed = 0;
  bool shuffle_users = true;  // false: visit users in dense-id order
  // Sampling budget for the bpr baseline; unset means
  // epochs * #clicked train events.
  std::optional<std::uint64_t> bpr_steps;
};

// One diagnostics record per processed block, in processing order.
struct BlockRecord {
  std::uint32_t epoch = 0;
  std::uint32_t user = 0;
  std::uint32_t block_index = 0;  // within the user's pass
  double grad_sq_norm = 0.0;
  double loss = 0.0;  // block loss before the update
};

struct Diagnostics {
  std::vector<BlockRecord> trace;
  std::vector<double> epoch_mean_loss;
  std::vector<std::uint64_t> user_block_counts;
  std::uint64_t users_discarded_below = 0;
  std::uint64_t users_discarded_above = 0;
  Thresholds resolved_thresholds;
  double effective_step = 0.0;
};

struct TrainResult {
  LatentModel model;
  Diagnostics diagnostics;
};

// Copy-on-first-touch journal of rows for one user's pass; rollback
// restores the pre-pass state bitwise.
class UserCheckpoint {
 public:
  explicit UserCheckpoint(LatentModel& model) : model_(&model) {}

  void touch_user(std::uint32_t u);
  void touch_item(std::uint32_t i);
  void rollback();
  std::size_t rows_saved() const {
    return saved_users_.size() + saved_items_.size();
  }

 private:
  LatentModel* model_;
  std::map<std::uint32_t, std::vector<double>> saved_users_;
  std::map<std::uint32_t, std::vector<double>> saved_items_;
};

// Bounded-block variant: per user, blocks are applied as plain gradient
// steps and the whole pass is rolled back when the user's block count
// falls outside the resolved [b, B].
TrainResult train_saros_b(const Dataset& train, const TrainConfig& config,
                          const InitSpec& init);

// Momentum variant: no block-count filtering; a sparse momentum buffer is
// carried across blocks and users.
TrainResult train_saros_m(const Dataset& train, const TrainConfig& config,
                          const InitSpec& init);

struct GradNormTrend {
  double min_at_quarter = 0.0;
  double min_at_half = 0.0;
  double min_at_end = 0.0;
  double loglog_slope = 0.0;  // least-squares slope of the running-min curve
};

// Running minimum of the squared-gradient-norm trace at N/4, N/2, N, plus
// the log-log slope of the running-min curve. Needs >= 100 entries.
GradNormTrend grad_norm_trend(std::span<const double> grad_sq_norms);
GradNormTrend grad_norm_trend(const Diagnostics& diagnostics);

// Seeded per-epoch visit order shared by both trainers.
std::vector<std::uint32_t> epoch_visit_order(std::size_t n_users,
                                             std::uint64_t seed,
                                             std::uint32_t epoch,
                                             bool shuffle);

}  // namespace saros
