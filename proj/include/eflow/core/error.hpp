#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eflow {

enum class ErrorKind {
  dimension,
  domain,
  sample_size,
  singular,
  numeric,
  contract,
  ingestion,
  config,
  capability,
  format,
};

std::string_view to_string(ErrorKind kind);

// Every failure in the library is reported as an Error carrying a kind, so
// callers (the CLI in particular) can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message);

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix, for adding context and re-raising.
  const std::string &message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string &message);

inline void require(bool condition, ErrorKind kind, const char *message) {
  if (!condition) {
    raise(kind, message);
  }
}

}  // namespace eflow
