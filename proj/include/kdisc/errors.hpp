#pragma once

#include <stdexcept>
#include <string>

namespace kdisc {

/// Bad input: malformed kernel ids, dimension mismatches, out-of-range parameters.
/// The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A method was requested that the kernel does not support (e.g. exact integrals
/// for a transported kernel).
class UnsupportedMethod : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A computation failed to produce a trustworthy number. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gram matrix too ill-conditioned to invert.
class SingularGramError : public NumericalError {
 public:
  SingularGramError(const std::string& what, double condition)
      : NumericalError(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

}  // namespace kdisc
