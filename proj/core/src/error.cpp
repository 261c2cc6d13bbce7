#include "dlr/error.hpp"

namespace dlr {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument:
      return "invalid-argument";
    case ErrorCode::numeric_overflow:
      return "numeric-overflow";
    case ErrorCode::singular_matrix:
      return "singular-matrix";
    case ErrorCode::config:
      return "config-error";
    case ErrorCode::data:
      return "data-error";
    case ErrorCode::format:
      return "format-error";
  }
  return "error";
}

}  // namespace dlr
