#pragma once

#include <stdexcept>
#include <string>

namespace mqed {

// Bad or inconsistent input: malformed files, violated preconditions.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A numerical procedure failed to reach its target (quadrature budget,
// step-size control, positivity violations).
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string &what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

} // namespace mqed
