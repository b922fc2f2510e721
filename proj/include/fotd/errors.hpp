#pragma once

#include <stdexcept>
#include <string>

namespace fotd {

enum class ErrorCode {
  dimension_mismatch,
  rank_deficient,
  degenerate_correlation,
  non_convergence,
  non_finite,
  zero_ensemble,
  out_of_range,
  configuration,
  memory_guard,
};

const char* to_string(ErrorCode code);

/// Base class for every error raised by the library. `code()` is stable and
/// machine readable; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Configuration problems are user errors; everything else is numeric.
  bool is_configuration() const noexcept {
    return code_ == ErrorCode::configuration || code_ == ErrorCode::memory_guard;
  }

 private:
  ErrorCode code_;
};

class RankDeficientError : public Error {
 public:
  explicit RankDeficientError(long column)
      : Error(ErrorCode::rank_deficient,
              "rank-deficient input: column " + std::to_string(column) +
                  " is numerically dependent on the preceding columns"),
        column_(column) {}

  long column() const noexcept { return column_; }

 private:
  long column_;
};

class NonFiniteError : public Error {
 public:
  NonFiniteError(std::string component, double time)
      : Error(ErrorCode::non_finite,
              "non-finite value in " + component + " at t=" + std::to_string(time)),
        component_(std::move(component)),
        time_(time) {}

  const std::string& component() const noexcept { return component_; }
  double time() const noexcept { return time_; }

 private:
  std::string component_;
  double time_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(ErrorCode::configuration, message) {}
};

}  // namespace fotd
