#pragma once

#include <stdexcept>
#include <string>

namespace pagd {

enum class ErrorKind {
  kInvalidInput,
  kInfeasibleBudget,
  kInstability,
  kNumericalFailure,
  kInvalidCap,
};

/// Base of every error thrown by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& what)
      : Error(ErrorKind::kInvalidInput, what) {}
};

class InfeasibleBudgetError : public Error {
 public:
  explicit InfeasibleBudgetError(const std::string& what)
      : Error(ErrorKind::kInfeasibleBudget, what) {}
};

/// Closed loop is not Schur stable; the LQR cost is infinite.
class InstabilityError : public Error {
 public:
  explicit InstabilityError(const std::string& what)
      : Error(ErrorKind::kInstability, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::kNumericalFailure, what) {}
};

/// Sublevel cap J is below four times the optimal cost.
class InvalidCapError : public Error {
 public:
  explicit InvalidCapError(const std::string& what)
      : Error(ErrorKind::kInvalidCap, what) {}
};

}  // namespace pagd
