#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qcn {

/// Coarse failure classes. The CLI maps each one to a distinct exit code and
/// prints the category name so callers can react without parsing messages.
enum class ErrorCategory {
  invalid_argument,
  layout_mismatch,
  domain,
  solver,
  config,
  io,
};

std::string_view to_string(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory category, const std::string& what) {
  throw Error(category, what);
}

}  // namespace qcn
