#pragma once

#include <stdexcept>
#include <string>

namespace aliasfree {

// Malformed or inconsistent configuration text.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// File system or file-format failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite samples or a degenerate measurement.
class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace aliasfree
