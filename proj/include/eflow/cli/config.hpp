#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "eflow/core/matrix.hpp"

namespace eflow::cli {

/// key=value run configuration. Lines are trimmed, '#' starts a comment,
/// later keys override earlier ones and unknown keys are config errors.
/// Every key has a default; an empty default marks an optional key.
class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig parse(std::string_view text, const std::string &source = "config");
  static RunConfig load(const std::string &path);

  void set(const std::string &key, const std::string &value);
  /// True when the key was given explicitly.
  bool given(const std::string &key) const;

  std::string text(const std::string &key) const;
  long long integer(const std::string &key) const;
  std::uint64_t unsigned_integer(const std::string &key) const;
  double real(const std::string &key) const;
  bool boolean(const std::string &key) const;
  std::vector<double> reals(const std::string &key) const;
  std::vector<Index> indices(const std::string &key) const;

  /// Every known key except `out` with its effective value, one per line in
  /// key order.
  std::string resolved() const;

  static const std::map<std::string, std::string> &defaults();

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace eflow::cli
