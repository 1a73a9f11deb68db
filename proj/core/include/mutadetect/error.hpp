#pragma once

#include <stdexcept>
#include <string>

namespace mutadetect {

// Error taxonomy, mapped to process exit codes by the CLI:
//   ConfigError -> 2, DataError -> 3, NumericError -> 4.
// ContractError signals a violated API precondition (a bug in the caller).

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace mutadetect
