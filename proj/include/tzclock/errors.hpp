#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tzclock {

// Contract violations on inputs (non-finite angles, empty shot counts, ...).
using InvalidArgument = std::invalid_argument;

// Raised when a sequence cannot be analysed as a Ramsey skeleton.
class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dual-quadrature inversion of a zero vector.
class UndefinedPhaseError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class InsufficientDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-convergent or degenerate fits. `diagnostics` carries solver state.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, std::vector<std::string> diagnostics = {})
      : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}

  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

}  // namespace tzclock
