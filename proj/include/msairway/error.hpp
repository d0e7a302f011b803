#pragma once

#include <stdexcept>
#include <string>

namespace msairway {

// Every failure raised by the library derives from Error. The CLI maps the
// three families below onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable, malformed or missing input (files, headers, payloads, usage).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Arguments that are well-formed but violate a contract (shapes, ranges).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Segmenter backend failures (nonzero exit, timeout, missing output).
class BackendError : public Error {
 public:
  using Error::Error;
};

class IndexError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class FormatError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace msairway
