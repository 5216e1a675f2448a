#pragma once

#include <stdexcept>
#include <string>

namespace synthctl {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Short machine-readable category, used by the CLI error JSON.
  [[nodiscard]] virtual const char* kind() const noexcept { return "error"; }
};

/// Malformed input or a violated precondition (bad file, bad window, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "validation"; }
};

/// Input outside an operation's mathematical domain (vkm <= 0, J < 2, ...).
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
  [[nodiscard]] const char* kind() const noexcept override { return "domain"; }
};

/// An iterative solver ran out of budget. Carries the best point it found.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_value, int evaluations)
      : Error(what), best_value_(best_value), evaluations_(evaluations) {}
  [[nodiscard]] const char* kind() const noexcept override { return "convergence"; }
  [[nodiscard]] double best_value() const noexcept { return best_value_; }
  [[nodiscard]] int evaluations() const noexcept { return evaluations_; }

 private:
  double best_value_;
  int evaluations_;
};

}  // namespace synthctl
