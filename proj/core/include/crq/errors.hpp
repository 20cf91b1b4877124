#pragma once

#include <stdexcept>
#include <string>

namespace crq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver exhausted its budget before meeting its tolerance.
class NonConvergence : public Error {
public:
  using Error::Error;
};

/// Bracket expansion for a scalar minimization never saw the objective increase.
class BracketFailure : public Error {
public:
  using Error::Error;
};

/// AMP iterates blew up.
class Divergence : public Error {
public:
  using Error::Error;
};

/// The SQUID preset would produce lambda = 0.
class DegenerateLambda : public Error {
public:
  using Error::Error;
};

/// Invalid user-supplied configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace crq
