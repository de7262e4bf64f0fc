#pragma once

#include <stdexcept>
#include <string>

namespace mrnav {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonPositiveDuration : Error {
  explicit NonPositiveDuration(double t)
      : Error("duration must be positive, got " + std::to_string(t)) {}
};

struct DegenerateInput : Error {
  using Error::Error;
};

struct NonMonotoneTimestamp : Error {
  using Error::Error;
};

struct DurationMismatch : Error {
  using Error::Error;
};

struct SingularTransform : Error {
  using Error::Error;
};

struct PackingFailure : Error {
  using Error::Error;
};

}  // namespace mrnav
