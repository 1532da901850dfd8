#pragma once

#include <stdexcept>
#include <string>

namespace pinchlab {

// Precondition or domain violation (bad word, inadmissible junction, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iterative construction hit its cap without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

}  // namespace pinchlab
