#pragma once

#include <stdexcept>

namespace fringeslam {

// Error taxonomy mirrors the CLI exit codes: bad configuration (2), bad or
// corrupt input data (3), numerical degeneracy detected at runtime (4).

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fringeslam
