#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sfion {

/// Machine-readable failure class, reported by the CLI as its exit status.
enum class ErrorCategory {
  domain = 3,        // argument outside the mathematical domain
  config = 2,        // invalid sizes, unknown keys, malformed config
  precondition = 4,  // input valid but insufficient (grid too short, ...)
  numerical = 5,     // runtime diagnostic tripped (norm drift, l_max)
  io = 6,
};

std::string_view category_name(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

inline Error domain_error(const std::string& what) {
  return {ErrorCategory::domain, what};
}
inline Error config_error(const std::string& what) {
  return {ErrorCategory::config, what};
}
inline Error precondition_error(const std::string& what) {
  return {ErrorCategory::precondition, what};
}
inline Error numerical_error(const std::string& what) {
  return {ErrorCategory::numerical, what};
}
inline Error io_error(const std::string& what) {
  return {ErrorCategory::io, what};
}

}  // namespace sfion
