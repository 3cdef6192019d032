#pragma once

#include <stdexcept>
#include <string>

namespace pgfl {

/// Bad arguments or malformed input data (dimension mismatch, out-of-range
/// parameters, unparsable files).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative routine failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Filesystem failures (missing files, unwritable output directories).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pgfl
