#pragma once

#include <stdexcept>
#include <string>

namespace dk {

/// Raised when two fields, kernels, or time grids that must agree do not.
class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a configuration fails validation (exit status 2 in the CLI).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a run produces a non-finite state (exit status 3 in the CLI).
class NumericalAbort : public std::runtime_error {
 public:
  NumericalAbort(const std::string& what, double t, long step)
      : std::runtime_error(what), t_(t), step_(step) {}
  double time() const { return t_; }
  long step() const { return step_; }

 private:
  double t_;
  long step_;
};

}  // namespace dk
