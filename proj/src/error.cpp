#include "sfion/error.hpp"

namespace sfion {

std::string_view category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::config: return "config";
    case ErrorCategory::precondition: return "precondition";
    case ErrorCategory::numerical: return "numerical";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

}  // namespace sfion
