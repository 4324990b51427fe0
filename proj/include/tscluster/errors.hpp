#ifndef TSCLUSTER_ERRORS_HPP
#define TSCLUSTER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tsc {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Singular normal equations with no ridge stabilizer.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

// Logistic coefficients diverged past the cap with no ridge stabilizer.
class Separation : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Value outside the family support (e.g. non-{0,1} binomial response).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A likelihood-ratio statistic came out negative beyond numerical noise.
class ConvergenceSuspect : public Error {
 public:
  using Error::Error;
};

class ThresholdOutOfRange : public Error {
 public:
  using Error::Error;
};

class DuplicateThreshold : public Error {
 public:
  using Error::Error;
};

// A unit with zero observations.
class EmptyUnit : public Error {
 public:
  using Error::Error;
};

class InvalidM0 : public Error {
 public:
  using Error::Error;
};

// Degenerate intercepts passed to the correlation transform.
class ZeroVariance : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

// More than half of the bootstrap replicates failed to fit.
class TooManyFailures : public Error {
 public:
  using Error::Error;
};

// The full fixed-effects model cannot be fit even with the ridge fallback.
class FullModelUnfit : public Error {
 public:
  using Error::Error;
};

// Malformed user input (CSV rows, flag combinations).
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace tsc

#endif  // TSCLUSTER_ERRORS_HPP
