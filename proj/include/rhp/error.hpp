#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rhp {

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by config parsing; carries one message per offending field.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> field_errors)
      : Error(join(field_errors)), field_errors_(std::move(field_errors)) {}

  const std::vector<std::string>& field_errors() const noexcept { return field_errors_; }

 private:
  static std::string join(const std::vector<std::string>& errors) {
    std::string out = "invalid config:";
    for (const auto& e : errors) out += "\n  " + e;
    return out;
  }

  std::vector<std::string> field_errors_;
};

}  // namespace rhp
