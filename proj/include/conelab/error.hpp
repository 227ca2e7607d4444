#pragma once

#include <stdexcept>
#include <string>

namespace conelab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad size, nonpositive radius, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A geometric quantity left its admissible domain (w <= 0, singular metric, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace conelab
