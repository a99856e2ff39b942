#pragma once

#include <stdexcept>
#include <string>

namespace minicex {

/// Base class for every failure raised by the harness.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration or data document.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  /// Same error, prefixed with the file it came from.
  ParseError(const std::string& source, const ParseError& inner)
      : Error(source + ": " + inner.what()), line_(inner.line()) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input violating a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical precondition failure (singular matrix, zero variance, ...).
class MathError : public Error {
 public:
  using Error::Error;
};

}  // namespace minicex
