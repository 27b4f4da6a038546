#pragma once

#include <stdexcept>
#include <string>

namespace cgm {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (origin query, k too large, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Geometry makes the requested computation numerically impossible:
/// covariance factorization failed after jitter, or an LS design is rank deficient.
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or input file. Messages carry `file:line:` prefixes.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cgm
