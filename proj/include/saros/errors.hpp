#pragma once

#include <stdexcept>
#include <string>

namespace saros {

// Error categories used to pick process exit codes in the CLI.

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Model file load failures, each distinguishable by type.
struct BadMagicError : DataError {
  using DataError::DataError;
};

struct TruncatedPayloadError : DataError {
  using DataError::DataError;
};

struct DimensionMismatchError : DataError {
  using DataError::DataError;
};

}  // namespace saros
