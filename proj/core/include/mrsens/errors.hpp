#pragma once

#include <stdexcept>
#include <string>

namespace mrsens {

// Thrown for bad user-supplied configuration (flag values, incompatible K/m, ...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown for file-system and parse failures.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown for numerical failures: positivity violations, zero conditioning mass,
// non-finite inputs discovered at run time.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mrsens
