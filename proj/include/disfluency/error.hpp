#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace disfl {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Errors that come from malformed input data (as opposed to bad usage).
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public DataError {
 public:
  explicit IoError(const std::string& what) : DataError("I/O error: " + what) {}
};

/// A record in a corpus file could not be read; line is 1-based.
class FormatError : public DataError {
 public:
  FormatError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace disfl
