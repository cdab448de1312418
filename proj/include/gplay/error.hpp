#pragma once

#include <stdexcept>
#include <string>

namespace gplay {

/// Caller supplied arguments that violate a documented precondition.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation could not produce a trustworthy result (singular system,
/// non-finite value).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The game mapping is not strongly monotone (smallest eigenvalue of the
/// symmetric part is not positive).
class NotStronglyMonotoneError : public InputError {
 public:
  using InputError::InputError;
};

/// sigma == 0: the mixing matrix is the exact averaging projector and the
/// step-size ceiling degenerates.
class PerfectMixingError : public InputError {
 public:
  using InputError::InputError;
};

/// Step size outside (0, alpha_max).
class InadmissibleStepError : public InputError {
 public:
  using InputError::InputError;
};

/// The iteration blew past the divergence guard.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

}  // namespace gplay
