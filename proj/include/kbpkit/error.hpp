#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kbp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax error in any of the concrete formats. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class MalformedFormula : public Error {
 public:
  using Error::Error;
};

// A problem, action or plan violates a load-time invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

// A resource budget (configurations, nodes, candidates) ran out.
class LimitExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace kbp
