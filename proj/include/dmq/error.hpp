#pragma once

#include <stdexcept>
#include <string>

namespace dmq {

/// Broad failure classes. The CLI maps them onto exit codes.
enum class ErrorKind {
  usage,      // malformed request: bad flag values, out-of-range parameters
  data,       // input data or modelling assumption violated
  numerical,  // a numerical routine failed to produce a usable result
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct UsageError : Error {
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

// Specific conditions that callers (and tests) want to single out.

struct InvalidDirectionError : DataError {
  using DataError::DataError;
};

/// Rotated data has a non-positive tail threshold; the data has to be recentred.
struct PositivityError : DataError {
  using DataError::DataError;
};

/// A tail index estimate is not strictly positive where heavy tails are required.
struct HeavyTailError : DataError {
  using DataError::DataError;
};

struct FactorizationError : NumericalError {
  using NumericalError::NumericalError;
};

struct DegenerateMomentsError : NumericalError {
  using NumericalError::NumericalError;
};

/// Bootstrap resampling could not retain enough positive rows.
struct ResampleError : NumericalError {
  using NumericalError::NumericalError;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::data: return "data";
    case ErrorKind::numerical: return "numerical";
  }
  return "unknown";
}

}  // namespace dmq
