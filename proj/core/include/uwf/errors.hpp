#pragma once

#include <stdexcept>
#include <string>

namespace uwf {

/// Invalid shapes, mismatched dimensions or malformed configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// NaN/Inf, divergence, or a numeric routine that could not produce a usable result.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File system and container format failures.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace uwf
