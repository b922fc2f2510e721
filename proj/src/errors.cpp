#include "fotd/errors.hpp"

namespace fotd {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_mismatch:
      return "dimension_mismatch";
    case ErrorCode::rank_deficient:
      return "rank_deficient";
    case ErrorCode::degenerate_correlation:
      return "degenerate_correlation";
    case ErrorCode::non_convergence:
      return "non_convergence";
    case ErrorCode::non_finite:
      return "non_finite";
    case ErrorCode::zero_ensemble:
      return "zero_ensemble";
    case ErrorCode::out_of_range:
      return "out_of_range";
    case ErrorCode::configuration:
      return "configuration";
    case ErrorCode::memory_guard:
      return "memory_guard";
  }
  return "unknown";
}

}  // namespace fotd
