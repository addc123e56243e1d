#pragma once

#include <stdexcept>
#include <string>

namespace datm {

/// Base for every error the library raises. The CLI maps each subclass to a
/// stable exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or inconsistent configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad or inconsistent input data (exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content; carries the 1-based line number when known.
class FormatError : public DataError {
 public:
  FormatError(const std::string& what, std::size_t line)
      : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  explicit FormatError(const std::string& what) : DataError(what), line_(0) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A computation produced no usable result (exit code 4).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace datm
