#pragma once

#include <stdexcept>
#include <string>

namespace vstab {

/// Bad input: parameters out of range, malformed documents, violated preconditions.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed to deliver its postcondition.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Profile construction could not satisfy one of the class conditions.
class ConstructionError : public ValidationError {
 public:
  ConstructionError(const std::string& condition, const std::string& detail)
      : ValidationError("profile construction failed [" + condition + "]: " + detail),
        condition_(condition) {}
  const std::string& condition() const { return condition_; }

 private:
  std::string condition_;
};

/// The a priori truncation bound at a shooting start point exceeds its budget.
class WindowTooSmall : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace vstab
