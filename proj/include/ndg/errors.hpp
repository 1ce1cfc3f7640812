#pragma once

#include <stdexcept>
#include <string>

namespace ndg {

/// A coefficient, source or exact-solution sample was not finite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested quantity needs data the problem does not provide.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solve broke down or did not reach the tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ndg
