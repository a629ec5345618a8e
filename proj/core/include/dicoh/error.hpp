#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dicoh {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes disagree with what an operation requires.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value, unknown key, or inconsistent settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input whose content is invalid (e.g. a label out of range).
class DataError : public Error {
 public:
  using Error::Error;
};

// A checkpoint and a dataset were built against different vocabularies.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

// Training could not continue (non-finite loss, missing gradient).
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace dicoh
