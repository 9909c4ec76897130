#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace saros {

// One parsed log line before id remapping.
struct RawRecord {
  std::string user;
  std::string item;
  double feedback = 0.0;  // explicit rating or 0/1 click flag
  std::int64_t timestamp = 0;
};

// Column positions within a delimited log line. The separator may be a
// multi-character string (e.g. "::" for MovieLens ratings files).
struct ColumnSchema {
  std::size_t user_col = 0;
  std::size_t item_col = 1;
  std::size_t feedback_col = 2;
  std::size_t timestamp_col = 3;
  std::string separator = "\t";
};

struct ParseError {
  std::size_t line;  // 1-based
  std::string message;
};

struct ParseResult {
  std::vector<RawRecord> records;
  std::vector<ParseError> errors;
  std::size_t total_lines = 0;
};

// Malformed lines are collected, not fatal, unless their fraction exceeds
// max_bad_ratio (then the whole parse aborts with DataError).
ParseResult parse_tsv(std::istream& source, const ColumnSchema& schema,
                      double max_bad_ratio = 0.1);

// File variant; transparently inflates gzip input (".gz" suffix or gzip
// magic bytes).
ParseResult parse_tsv_file(const std::string& path, const ColumnSchema& schema,
                           double max_bad_ratio = 0.1);

// A record after feedback binarization, still keyed by raw string ids.
struct LabeledEvent {
  std::string user;
  std::string item;
  bool clicked = false;
  std::int64_t timestamp = 0;
};

// clicked = (feedback > positive_threshold). Pure click logs use a
// threshold below 1 (e.g. 0.5) so the flag passes through. Event count
// and order are preserved.
std::vector<LabeledEvent> binarize(const std::vector<RawRecord>& records,
                                   double positive_threshold);

// One event with dense ids, the unit the trainers consume.
struct Interaction {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  bool clicked = false;
  std::int64_t timestamp = 0;
};

// Indexed corpus: per-user event sequences sorted by (timestamp, input
// order), plus bijective raw-id vocabularies in first-occurrence order.
struct Dataset {
  std::vector<std::vector<Interaction>> events_by_user;
  std::vector<std::string> user_ids;  // dense -> raw
  std::vector<std::string> item_ids;
  std::unordered_map<std::string, std::uint32_t> user_index;  // raw -> dense
  std::unordered_map<std::string, std::uint32_t> item_index;

  std::size_t n_users() const { return user_ids.size(); }
  std::size_t n_items() const { return item_ids.size(); }
  std::size_t n_events() const;

  // Re-flatten to labeled events (per-user order, users by dense id).
  std::vector<LabeledEvent> flatten() const;
};

Dataset build_index(const std::vector<LabeledEvent>& events);

// Per user, the chronologically last ceil(test_fraction * n) events go to
// test. Users left with an empty side are dropped from both halves (their
// sequences become empty); the shared vocabularies are kept intact so
// dense ids line up between the two datasets.
std::pair<Dataset, Dataset> temporal_split(const Dataset& dataset,
                                           double test_fraction);

}  // namespace saros
