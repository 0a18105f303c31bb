#include "qcn/error.hpp"

namespace qcn {

std::string_view to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::invalid_argument: return "invalid_argument";
    case ErrorCategory::layout_mismatch: return "layout_mismatch";
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::solver: return "solver";
    case ErrorCategory::config: return "config";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

}  // namespace qcn
