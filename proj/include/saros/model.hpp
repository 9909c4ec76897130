#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace saros {

// Deterministic initialization recipe: identical recipe + shapes give
// bitwise-identical models. Entries are i.i.d. uniform on
// [-scale, +scale] from per-row xoshiro256** streams keyed by
// (seed, matrix side, row index), so a row's values are stable even when
// the other matrix grows.
struct InitSpec {
  std::uint64_t seed = 0;
  double scale = 0.01;
};

// Latent factor container: user matrix (N x k) and item matrix (M x k),
// row-major doubles. Mutated only by a single trainer pass; concurrent
// reads are safe once training is done.
class LatentModel {
 public:
  LatentModel(std::size_t n_users, std::size_t n_items, std::size_t dim);

  std::size_t n_users() const { return n_users_; }
  std::size_t n_items() const { return n_items_; }
  std::size_t dim() const { return dim_; }

  std::span<double> user_row(std::size_t u);
  std::span<const double> user_row(std::size_t u) const;
  std::span<double> item_row(std::size_t i);
  std::span<const double> item_row(std::size_t i) const;

  std::span<const double> user_data() const { return user_factors_; }
  std::span<const double> item_data() const { return item_factors_; }

  bool bitwise_equal(const LatentModel& other) const;

 private:
  std::size_t n_users_;
  std::size_t n_items_;
  std::size_t dim_;
  std::vector<double> user_factors_;
  std::vector<double> item_factors_;
};

LatentModel init_model(std::size_t n_users, std::size_t n_items,
                       std::size_t k, const InitSpec& spec);

// Inner product of the user row and the item row.
double score(const LatentModel& model, std::size_t u, std::size_t i);

// Binary model file: magic "SARM", u32 version = 1, then N, M, k as u64,
// then N*k user doubles and M*k item doubles, little-endian row-major.
void save_model(const LatentModel& model, std::ostream& sink);
void save_model(const LatentModel& model, const std::string& path);
LatentModel load_model(std::istream& source);
LatentModel load_model(const std::string& path);

}  // namespace saros
