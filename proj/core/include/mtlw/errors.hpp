#pragma once

#include <stdexcept>
#include <string>

namespace mtlw {

// Shape or arity mismatch, bad sizes, structurally invalid requests.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Value outside an operation's mathematical domain (log of <= 0, missing class, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed or inconsistent on-disk data (manifest rows, feature files, checkpoints).
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File system failures: cannot open, cannot write.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration value; key() names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::invalid_argument(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace mtlw
