#pragma once

#include <stdexcept>
#include <string>

namespace crossdiff {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Raised when a tensor's quadratic form is not bounded below by a positive constant.
class EllipticityViolation : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, double residual, double time = 0.0)
      : Error(what), residual_(residual), time_(time) {}

  double residual() const { return residual_; }
  double time() const { return time_; }

 private:
  double residual_;
  double time_;
};

// Failure of the auxiliary elliptic head solve in the confined-aquifer model.
class EllipticSolveFailure : public SolverFailure {
 public:
  using SolverFailure::SolverFailure;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace crossdiff
