#pragma once

#include <stdexcept>
#include <string>

namespace posefuse {

// Process exit codes used by the CLI. Library code throws the matching
// exception type; the CLI entry point maps each to its code.
enum class ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kIoError = 3,
  kNumericalError = 4,
  kCheckFailure = 5,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parse failure; carries the 1-based line number of the offending record.
class ParseError : public IoError {
 public:
  ParseError(const std::string& what, long line)
      : IoError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace posefuse
