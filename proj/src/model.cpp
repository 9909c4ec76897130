#include "saros/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "saros/errors.hpp"
#include "saros/rng.hpp"

namespace saros {

namespace {

constexpr char kMagic[4] = {'S', 'A', 'R', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char buf[4];
  for (int b = 0; b < 4; ++b) buf[b] = static_cast<unsigned char>(v >> (8 * b));
  out.write(reinterpret_cast<const char*>(buf), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int b = 0; b < 8; ++b) buf[b] = static_cast<unsigned char>(v >> (8 * b));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

void write_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(out, bits);
}

bool read_exact(std::istream& in, unsigned char* buf, std::size_t n) {
  in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(in.gcount()) == n;
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char buf[4];
  if (!read_exact(in, buf, 4)) throw TruncatedPayloadError("model file: truncated header");
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(buf[b]) << (8 * b);
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char buf[8];
  if (!read_exact(in, buf, 8)) throw TruncatedPayloadError("model file: truncated header");
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
  return v;
}

void read_f64_block(std::istream& in, double* dst, std::size_t count) {
  for (std::size_t n = 0; n < count; ++n) {
    unsigned char buf[8];
    if (!read_exact(in, buf, 8)) throw TruncatedPayloadError("model file: truncated factor payload");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    std::memcpy(&dst[n], &bits, 8);
  }
}

// Each row gets its own xoshiro stream derived from (seed, side, row), so
// a row's initial values do not depend on the other matrix's size.
std::uint64_t row_stream_seed(std::uint64_t seed, std::uint64_t side,
                              std::uint64_t row) {
  std::uint64_t state = seed;
  const std::uint64_t base = splitmix64_next(state);
  state = base ^ (side * 0xd1342543de82ef95ULL) ^ (row * 0xaf251af3b0f025b5ULL);
  return splitmix64_next(state);
}

}  // namespace

LatentModel::LatentModel(std::size_t n_users, std::size_t n_items, std::size_t dim)
    : n_users_(n_users),
      n_items_(n_items),
      dim_(dim),
      user_factors_(n_users * dim, 0.0),
      item_factors_(n_items * dim, 0.0) {
  if (n_users == 0 || n_items == 0 || dim == 0)
    throw std::invalid_argument("LatentModel: dimensions must be >= 1");
}

std::span<double> LatentModel::user_row(std::size_t u) {
  if (u >= n_users_) throw std::invalid_argument("user id out of range");
  return {user_factors_.data() + u * dim_, dim_};
}

std::span<const double> LatentModel::user_row(std::size_t u) const {
  if (u >= n_users_) throw std::invalid_argument("user id out of range");
  return {user_factors_.data() + u * dim_, dim_};
}

std::span<double> LatentModel::item_row(std::size_t i) {
  if (i >= n_items_) throw std::invalid_argument("item id out of range");
  return {item_factors_.data() + i * dim_, dim_};
}

std::span<const double> LatentModel::item_row(std::size_t i) const {
  if (i >= n_items_) throw std::invalid_argument("item id out of range");
  return {item_factors_.data() + i * dim_, dim_};
}

bool LatentModel::bitwise_equal(const LatentModel& other) const {
  if (n_users_ != other.n_users_ || n_items_ != other.n_items_ || dim_ != other.dim_)
    return false;
  return std::memcmp(user_factors_.data(), other.user_factors_.data(),
                     user_factors_.size() * sizeof(double)) == 0 &&
         std::memcmp(item_factors_.data(), other.item_factors_.data(),
                     item_factors_.size() * sizeof(double)) == 0;
}

LatentModel init_model(std::size_t n_users, std::size_t n_items,
                       std::size_t k, const InitSpec& spec) {
  if (n_users == 0 || n_items == 0 || k == 0)
    throw std::invalid_argument("init_model: dimensions must be >= 1");
  if (spec.scale < 0.0) throw std::invalid_argument("init_model: scale must be >= 0");
  LatentModel model(n_users, n_items, k);
  for (std::size_t u = 0; u < n_users; ++u) {
    Xoshiro256 rng(row_stream_seed(spec.seed, 1, u));
    for (double& x : model.user_row(u)) x = rng.uniform_symmetric(spec.scale);
  }
  for (std::size_t i = 0; i < n_items; ++i) {
    Xoshiro256 rng(row_stream_seed(spec.seed, 2, i));
    for (double& x : model.item_row(i)) x = rng.uniform_symmetric(spec.scale);
  }
  return model;
}

double score(const LatentModel& model, std::size_t u, std::size_t i) {
  auto uu = model.user_row(u);
  auto ii = model.item_row(i);
  double s = 0.0;
  for (std::size_t d = 0; d < uu.size(); ++d) s += uu[d] * ii[d];
  return s;
}

void save_model(const LatentModel& model, std::ostream& sink) {
  sink.write(kMagic, 4);
  write_u32(sink, kFormatVersion);
  write_u64(sink, model.n_users());
  write_u64(sink, model.n_items());
  write_u64(sink, model.dim());
  for (double v : model.user_data()) write_f64(sink, v);
  for (double v : model.item_data()) write_f64(sink, v);
  if (!sink) throw IoError("save_model: write failed");
}

void save_model(const LatentModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_model: cannot open " + path);
  save_model(model, out);
}

LatentModel load_model(std::istream& source) {
  unsigned char magic[4];
  if (!read_exact(source, magic, 4))
    throw TruncatedPayloadError("model file: shorter than magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw BadMagicError("model file: bad magic bytes");
  const std::uint32_t version = read_u32(source);
  if (version != kFormatVersion)
    throw DimensionMismatchError("model file: unsupported format version " +
                                 std::to_string(version));
  const std::uint64_t n = read_u64(source);
  const std::uint64_t m = read_u64(source);
  const std::uint64_t k = read_u64(source);
  if (n == 0 || m == 0 || k == 0)
    throw DimensionMismatchError("model file: zero dimension in header");
  LatentModel model(static_cast<std::size_t>(n), static_cast<std::size_t>(m),
                    static_cast<std::size_t>(k));
  for (std::size_t u = 0; u < model.n_users(); ++u)
    read_f64_block(source, model.user_row(u).data(), model.dim());
  for (std::size_t i = 0; i < model.n_items(); ++i)
    read_f64_block(source, model.item_row(i).data(), model.dim());
  for (double v : model.user_data())
    if (!std::isfinite(v)) throw DataError("model file: non-finite user factor");
  for (double v : model.item_data())
    if (!std::isfinite(v)) throw DataError("model file: non-finite item factor");
  return model;
}

LatentModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_model: cannot open " + path);
  return load_model(in);
}

}  // namespace saros
