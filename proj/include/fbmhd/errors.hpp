#pragma once

#include <stdexcept>
#include <string>

namespace fbmhd {

/// Base of every recoverable numerical failure; the CLI maps each subclass
/// to its own exit code.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// min over nodes of d2 phi fell below the floor.
class DiffeomorphismFailure : public NumericalFailure {
 public:
  DiffeomorphismFailure(const std::string& what, double min_jacobian)
      : NumericalFailure(what), min_jacobian_(min_jacobian) {}
  double min_jacobian() const { return min_jacobian_; }

 private:
  double min_jacobian_;
};

class CompatibilityViolation : public NumericalFailure {
 public:
  CompatibilityViolation(const std::string& what, double residual)
      : NumericalFailure(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class NoConvergence : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class SingularSystem : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// Rejected configuration or argument outside a documented domain.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace fbmhd
