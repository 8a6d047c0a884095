#pragma once

#include <stdexcept>
#include <string>

namespace dflsim {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands disagree on shape (architecture tag, vector length, feature dim).
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// A precondition on an argument value was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Local training produced a non-finite loss.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

/// Scenario configuration problem. `key_path` names the offending key
/// (dotted, e.g. "aggregator.name").
class ConfigError : public Error {
 public:
  ConfigError(std::string key_path, const std::string& what)
      : Error(key_path.empty() ? what : key_path + ": " + what), key_path_(std::move(key_path)) {}
  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

}  // namespace dflsim
