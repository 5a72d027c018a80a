#pragma once

#include <stdexcept>
#include <string>

namespace mpde {

/// Raised when a solver cannot continue (step-size underflow, singular step
/// matrix, failed affine verification). `code()` is a stable identifier used
/// by the command line tool for machine-readable error reports.
class SolverError : public std::runtime_error {
 public:
  SolverError(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  [[nodiscard]] const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace mpde
