#pragma once

/**
 * @file reference.hpp
 * @brief Conventional transient solve of A x' + B x = c(t) that integrates
 *        piecewise between exactly located PWM switching instants.
 */

#include "mpde/circuit.hpp"
#include "mpde/integrator.hpp"
#include "mpde/trajectory.hpp"

#include <vector>

namespace mpde {

struct EventGrid {
  /// Duty crossings d(t*) = s(t*), one per switching period.
  std::vector<double> switch_times;
  /// Carrier resets k * Ts inside the span.
  std::vector<double> period_starts;
  double period = 0.0;

  /// Period starts and switch instants merged in ascending order.
  [[nodiscard]] std::vector<double> merged() const;
};

/// Locates each crossing by bisection (at most 50 halvings) on the carrier
/// phase. Throws SolverError("no_duty_crossing") if d - s keeps its sign
/// across a period.
EventGrid find_switch_times(const PwmExcitation& exc, double t0, double t1);

/// Defaults applied by solve_reference when the config leaves them unset.
SolverConfig reference_defaults(const PwmExcitation& exc, SolverConfig cfg);

IntegrationResult solve_reference(const LinearCircuit& circuit, const PwmExcitation& exc,
                                  double t0, double t1, const SolverConfig& cfg);

/// abstol = reltol = 1e-12, max_step = Ts/1000, no dense output.
SolverConfig oracle_config(const PwmExcitation& exc);
Trajectory make_reference_oracle(const LinearCircuit& circuit, const PwmExcitation& exc,
                                 double t0, double t1);

}  // namespace mpde
