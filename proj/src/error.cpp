#include "hgn/error.hpp"

namespace hgn {

const char* to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::usage: return "usage";
    case ErrorCategory::config: return "config";
    case ErrorCategory::contract: return "contract";
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::io: return "io";
    case ErrorCategory::corrupt: return "corrupt";
    case ErrorCategory::truncated: return "truncated";
    case ErrorCategory::version: return "version";
  }
  return "unknown";
}

Error::Error(ErrorCategory category, const std::string& message)
    : std::runtime_error(std::string(to_string(category)) + ": " + message),
      category_(category) {}

void raise(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

}  // namespace hgn
