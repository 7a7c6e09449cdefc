#include "eflow/core/error.hpp"

namespace eflow {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::sample_size: return "sample-size error";
    case ErrorKind::singular: return "singular-matrix error";
    case ErrorKind::numeric: return "numeric error";
    case ErrorKind::contract: return "contract error";
    case ErrorKind::ingestion: return "ingestion error";
    case ErrorKind::config: return "config error";
    case ErrorKind::capability: return "capability error";
    case ErrorKind::format: return "format error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string &message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      message_(message) {}

void raise(ErrorKind kind, const std::string &message) {
  throw Error(kind, message);
}

}  // namespace eflow
