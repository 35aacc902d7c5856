#pragma once

#include <stdexcept>
#include <string>

namespace atlforge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax or validation problem in some input text, located at line/col (1-based).
class ParseError : public Error {
 public:
  ParseError(int line, int col, const std::string& message)
      : Error(std::to_string(line) + ":" + std::to_string(col) + ": " + message),
        line_(line),
        col_(col),
        message_(message) {}

  int line() const { return line_; }
  int col() const { return col_; }
  const std::string& message() const { return message_; }

 private:
  int line_;
  int col_;
  std::string message_;
};

// The model is well formed but its semantics are broken (nondeterminism,
// out-of-domain assignment, empty protocol).
class ModelError : public Error {
 public:
  using Error::Error;
};

class StrategyError : public Error {
 public:
  using Error::Error;
};

class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace atlforge
