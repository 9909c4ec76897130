#include "saros/interactions.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <sstream>

#include "saros/errors.hpp"

namespace saros {

namespace {

std::vector<std::string_view> split_line(std::string_view line,
                                         std::string_view sep) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + sep.size();
  }
  return fields;
}

bool parse_double(std::string_view s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_i64(std::string_view s, std::int64_t& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool looks_gzip(const std::string& path) {
  if (path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0) return true;
  std::ifstream probe(path, std::ios::binary);
  unsigned char magic[2] = {0, 0};
  probe.read(reinterpret_cast<char*>(magic), 2);
  return probe.gcount() == 2 && magic[0] == 0x1f && magic[1] == 0x8b;
}

std::string inflate_file(const std::string& path) {
  gzFile gz = gzopen(path.c_str(), "rb");
  if (gz == nullptr) throw IoError("cannot open " + path);
  std::string content;
  char buf[1 << 16];
  int n;
  while ((n = gzread(gz, buf, sizeof(buf))) > 0) content.append(buf, static_cast<std::size_t>(n));
  const bool ok = (n == 0);
  gzclose(gz);
  if (!ok) throw IoError("gzip inflate failed for " + path);
  return content;
}

}  // namespace

ParseResult parse_tsv(std::istream& source, const ColumnSchema& schema,
                      double max_bad_ratio) {
  if (!source) throw IoError("parse_tsv: unreadable source");
  if (schema.separator.empty()) throw std::invalid_argument("parse_tsv: empty separator");
  const std::size_t min_cols =
      1 + std::max({schema.user_col, schema.item_col, schema.feedback_col,
                    schema.timestamp_col});

  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_line(line, schema.separator);
    if (fields.size() < min_cols) {
      result.errors.push_back({line_no, "too few columns"});
      continue;
    }
    RawRecord rec;
    rec.user.assign(fields[schema.user_col]);
    rec.item.assign(fields[schema.item_col]);
    if (rec.user.empty() || rec.item.empty()) {
      result.errors.push_back({line_no, "empty id field"});
      continue;
    }
    if (!parse_double(fields[schema.feedback_col], rec.feedback)) {
      result.errors.push_back({line_no, "unparsable feedback field"});
      continue;
    }
    if (!parse_i64(fields[schema.timestamp_col], rec.timestamp)) {
      result.errors.push_back({line_no, "unparsable timestamp field"});
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  result.total_lines = line_no;
  if (line_no > 0) {
    const double bad_ratio =
        static_cast<double>(result.errors.size()) / static_cast<double>(line_no);
    if (bad_ratio > max_bad_ratio)
      throw DataError("parse_tsv: " + std::to_string(result.errors.size()) +
                      " of " + std::to_string(line_no) +
                      " lines malformed, above the configured limit");
  }
  return result;
}

ParseResult parse_tsv_file(const std::string& path, const ColumnSchema& schema,
                           double max_bad_ratio) {
  if (looks_gzip(path)) {
    std::istringstream in(inflate_file(path));
    return parse_tsv(in, schema, max_bad_ratio);
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_tsv(in, schema, max_bad_ratio);
}

std::vector<LabeledEvent> binarize(const std::vector<RawRecord>& records,
                                   double positive_threshold) {
  std::vector<LabeledEvent> events;
  events.reserve(records.size());
  for (const auto& rec : records)
    events.push_back({rec.user, rec.item, rec.feedback > positive_threshold,
                      rec.timestamp});
  return events;
}

std::size_t Dataset::n_events() const {
  std::size_t n = 0;
  for (const auto& seq : events_by_user) n += seq.size();
  return n;
}

std::vector<LabeledEvent> Dataset::flatten() const {
  std::vector<LabeledEvent> events;
  events.reserve(n_events());
  for (std::size_t u = 0; u < events_by_user.size(); ++u)
    for (const auto& ev : events_by_user[u])
      events.push_back({user_ids[u], item_ids[ev.item], ev.clicked, ev.timestamp});
  return events;
}

Dataset build_index(const std::vector<LabeledEvent>& events) {
  Dataset ds;
  for (const auto& ev : events) {
    auto [uit, u_new] = ds.user_index.try_emplace(
        ev.user, static_cast<std::uint32_t>(ds.user_ids.size()));
    if (u_new) {
      ds.user_ids.push_back(ev.user);
      ds.events_by_user.emplace_back();
    }
    auto [iit, i_new] = ds.item_index.try_emplace(
        ev.item, static_cast<std::uint32_t>(ds.item_ids.size()));
    if (i_new) ds.item_ids.push_back(ev.item);
    ds.events_by_user[uit->second].push_back(
        {uit->second, iit->second, ev.clicked, ev.timestamp});
  }
  // Stable sort keeps input order among equal timestamps.
  for (auto& seq : ds.events_by_user)
    std::stable_sort(seq.begin(), seq.end(),
                     [](const Interaction& a, const Interaction& b) {
                       return a.timestamp < b.timestamp;
                     });
  return ds;
}

std::pair<Dataset, Dataset> temporal_split(const Dataset& dataset,
                                           double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("temporal_split: fraction must be in (0,1)");
  Dataset train = dataset;
  Dataset test = dataset;
  for (std::size_t u = 0; u < dataset.events_by_user.size(); ++u) {
    const auto& seq = dataset.events_by_user[u];
    const std::size_t n = seq.size();
    const std::size_t n_test =
        static_cast<std::size_t>(std::ceil(test_fraction * static_cast<double>(n)));
    if (n < 2 || n_test == 0 || n_test >= n) {
      train.events_by_user[u].clear();
      test.events_by_user[u].clear();
      continue;
    }
    const std::size_t n_train = n - n_test;
    train.events_by_user[u].assign(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.events_by_user[u].assign(seq.begin() + static_cast<std::ptrdiff_t>(n_train), seq.end());
  }
  return {std::move(train), std::move(test)};
}

}  // namespace saros
