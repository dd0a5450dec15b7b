#pragma once

#include <stdexcept>
#include <string>

namespace hgn {

// Machine-readable failure categories. The CLI maps these to exit codes and
// prints the category token so callers can dispatch without parsing prose.
enum class ErrorCategory {
  usage,      // bad command line
  config,     // inconsistent or invalid configuration
  contract,   // precondition / invariant violation (including non-finite values)
  domain,     // mathematical domain error (bad angle, zero vector, ...)
  io,         // filesystem failure
  corrupt,    // malformed file content
  truncated,  // file ends before the declared payload
  version     // file version mismatch
};

const char* to_string(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message);
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] void raise(ErrorCategory category, const std::string& message);

}  // namespace hgn
