#pragma once

#include <stdexcept>
#include <string>

namespace mvlevy {

/// A model assumption (A1-A3, B1-B3) fails for the given configuration.
/// what() starts with the assumption name, e.g. "B3: lambda_1 - L_G = 0 <= 0 ...".
class AssumptionError : public std::runtime_error {
 public:
  AssumptionError(std::string name, const std::string& detail)
      : std::runtime_error(name + ": " + detail), name_(std::move(name)) {}
  const std::string& assumption() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Malformed configuration; pointer is the RFC 6901 JSON pointer of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : std::runtime_error(pointer + ": " + message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace mvlevy
