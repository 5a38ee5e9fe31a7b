#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace frontier {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed data, violated preconditions, unusable configuration.
/// The CLI maps these to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A well-posed solve that did not finish. The CLI maps these to exit code 2.
class SolverError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotPositiveDefinite : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonPositiveLambda : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EpsilonTooLarge : public ValidationError {
 public:
  EpsilonTooLarge(const std::string& what, double epsilon, long minimal_n)
      : ValidationError(what), epsilon_(epsilon), minimal_n_(minimal_n) {}
  double epsilon() const { return epsilon_; }
  /// Smallest dimension n that brings epsilon below one at the same m.
  long minimal_n() const { return minimal_n_; }

 private:
  double epsilon_;
  long minimal_n_;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonMonotoneDates : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class TooFewRows : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class FileTooLarge : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateCovariance : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UsageError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InfeasibleDomain : public SolverError {
 public:
  using SolverError::SolverError;
};

class InfeasibleBudget : public SolverError {
 public:
  using SolverError::SolverError;
};

class InfeasibleAtBeta : public SolverError {
 public:
  using SolverError::SolverError;
};

class ZeroIterate : public SolverError {
 public:
  using SolverError::SolverError;
};

class NonFiniteGradient : public SolverError {
 public:
  using SolverError::SolverError;
};

class DivergenceDetected : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Carries the best iterate seen so callers can still inspect it.
class MaxIterationsExceeded : public SolverError {
 public:
  MaxIterationsExceeded(const std::string& what, Eigen::VectorXd best, double residual)
      : SolverError(what), best_(std::move(best)), residual_(residual) {}
  const Eigen::VectorXd& best_iterate() const { return best_; }
  double residual() const { return residual_; }

 private:
  Eigen::VectorXd best_;
  double residual_;
};

}  // namespace frontier
