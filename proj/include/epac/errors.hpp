#ifndef EPAC_ERRORS_HPP
#define EPAC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace epac {

/// Base class for all failures raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Spectral truncation too small for the requested temperature.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// A retained eigenstate does not decay at the grid boundary.
class BoundaryLeakError : public Error {
 public:
  using Error::Error;
};

/// Eigensolve or inverse iteration failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// An effective-potential curve violated its convexity invariant.
class ConvexityError : public Error {
 public:
  using Error::Error;
};

/// Q(J) failed to be strictly increasing.
class MonotonicityError : public Error {
 public:
  using Error::Error;
};

/// Polynomial fit of the effective potential failed or is ill conditioned.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Monte Carlo sampler left its valid operating regime.
class SamplingError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace epac

#endif  // EPAC_ERRORS_HPP
