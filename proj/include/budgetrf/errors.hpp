#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace budgetrf {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Integer arithmetic exceeded the 64-bit range. Impurity values are kept
/// exact, so overflow is reported instead of wrapping.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// A data file failed to parse. Carries the 1-based line number when known.
class DataError : public Error {
 public:
  DataError(const std::string& path, std::size_t line, const std::string& message)
      : Error(path + ":" + std::to_string(line) + ": " + message), line_(line) {}
  explicit DataError(const std::string& message) : Error(message), line_(0) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A model file is malformed or has an unsupported version.
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace budgetrf
