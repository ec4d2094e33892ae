#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace coulomb_ot {

/// Argument or evaluation point outside the domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Measure cannot be discretized (negative, non-finite, or zero total mass).
class IntegrabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No radius satisfies the non-concentration bound at the finest level.
class ConcentrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every coupling has infinite cost.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative method stopped before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Mixed Hessian of the modified cost is singular (|x - y| = 2/3 delta).
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The chain relaxation found a negative cycle; the plan support is not
/// c-monotone. `cycle()` lists the support entry indices along the cycle.
class NegativeCycleError : public std::runtime_error {
 public:
  NegativeCycleError(const std::string& what, std::vector<int> cycle)
      : std::runtime_error(what), cycle_(std::move(cycle)) {}
  const std::vector<int>& cycle() const noexcept { return cycle_; }

 private:
  std::vector<int> cycle_;
};

}  // namespace coulomb_ot
