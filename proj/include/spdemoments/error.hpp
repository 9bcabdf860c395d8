#pragma once

#include <stdexcept>
#include <string>

namespace spdemoments {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments, malformed configuration, unknown names.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure inside a solver (singular systems, budget overruns,
/// quadrature construction failures).
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace spdemoments
