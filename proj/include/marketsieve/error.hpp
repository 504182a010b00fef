#pragma once

#include <stdexcept>
#include <string>

namespace marketsieve {

// Bad input data (malformed files, alignment failures, rule violations).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parse failure tied to a 1-based line of the offending input.
class ParseError : public InputError {
 public:
  ParseError(int line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

class AlignmentError : public InputError {
 public:
  using InputError::InputError;
};

// Inconsistent or incomplete configuration (missing resources, bad options).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace marketsieve
