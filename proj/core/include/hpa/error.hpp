#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace hpa {

// Bad user input: malformed files, unknown keys, out-of-domain values.
// The CLI maps these to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure (non-finite state, step-size underflow, singular data).
// The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what,
                          std::optional<double> t = std::nullopt)
      : std::runtime_error(what), time_(t) {}

  // Model time (minutes) at which the failure happened, when known.
  std::optional<double> time() const { return time_; }

 private:
  std::optional<double> time_;
};

// Argument outside the mathematical domain of a model function (e.g. a
// negative concentration handed to hill()).
class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace hpa
