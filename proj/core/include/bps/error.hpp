#pragma once

#include <stdexcept>
#include <string>

namespace bps {

// Failure categories surfaced by the library. The CLI maps each one to a
// distinct process exit code.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bps
