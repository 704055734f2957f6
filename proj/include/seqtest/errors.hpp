#pragma once

#include <stdexcept>
#include <string>

namespace seqtest {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter point lies outside the scheme's parameter domain.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Malformed caller input (wrong lengths, short streams, bad indices).
class InputError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver did not reach its tolerance.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, double last_gap)
      : Error(what), last_gap_(last_gap) {}
  double last_gap() const noexcept { return last_gap_; }

 private:
  double last_gap_;
};

/// No barrier-based cut exists because the region to discard contains the
/// analytic center of the body.
class CutInfeasible : public Error {
 public:
  using Error::Error;
};

/// Two bodies of different colors are not separated (risk not below one).
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for the given observation scheme.
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// Malformed experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace seqtest
