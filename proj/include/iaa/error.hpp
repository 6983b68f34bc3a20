#pragma once

#include <stdexcept>
#include <string>

namespace iaa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration: unknown distance name, malformed parameter, bad flag.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a contract (mixed kinds, malformed payload, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A measure is undefined for the given samples (e.g. all expected distances zero).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace iaa
