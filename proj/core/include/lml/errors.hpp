#pragma once

#include <stdexcept>
#include <string>

namespace lml {

// Bad user-supplied configuration (CLI/config file). Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Unreadable or malformed input data (IDX files, paths). Maps to exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lml
