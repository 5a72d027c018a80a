#pragma once

/**
 * @file integrator.hpp
 * @brief Variable-step BDF (orders 1-2) for linear descriptor systems
 *        M(t) x' + N(t) x = f(t).
 *
 * Backward-difference formulation with a fixed leading coefficient: the
 * difference history is re-interpolated whenever the step size changes, so
 * the step matrix M + (h/G_k) N only depends on h and the order. Each step is
 * a single linear solve; there is no Newton iteration.
 */

#include "mpde/trajectory.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>

namespace mpde {

struct SolverConfig {
  double abstol = 1e-6;
  double reltol = 1e-3;
  int max_order = 2;
  std::optional<double> max_step;
  std::optional<double> initial_step;
  /// Disables error control and takes steps of exactly this size.
  std::optional<double> fixed_step;
  /// Store per-step interpolation data in the trajectory.
  bool dense_output = true;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct SolverStats {
  long accepted_steps = 0;
  long failed_steps = 0;
  long lu_factorizations = 0;
  long function_evaluations = 0;
  long linear_solves = 0;
  /// Number of integrator (re)starts; each start factors the mass matrix once
  /// to obtain the initial slope.
  long starts = 0;

  SolverStats& operator+=(const SolverStats& o);
};

struct DescriptorSystem {
  int dim = 0;
  std::function<void(double, Eigen::MatrixXd&)> mass;
  std::function<void(double, Eigen::MatrixXd&)> stiffness;
  std::function<void(double, Eigen::VectorXd&)> forcing;
  /// Time-invariant matrices let the integrator reuse factorizations.
  bool constant_mass = false;
  bool constant_stiffness = false;

  static DescriptorSystem constant(Eigen::MatrixXd M, Eigen::MatrixXd N, Eigen::VectorXd f);
};

struct IntegrationResult {
  Trajectory trajectory;
  SolverStats stats;
};

/// Throws SolverError("step_size_underflow") when h < 1e-14 * (t1 - t0) and
/// SolverError("singular_step_matrix") when a step matrix cannot be factored.
IntegrationResult integrate(const DescriptorSystem& sys, double t0, double t1,
                            const Eigen::VectorXd& x0, const SolverConfig& cfg);

/// Continues `traj`, whose last sample must be (t0, x0). Accumulates into
/// `stats`.
void integrate_append(const DescriptorSystem& sys, double t0, double t1, const Eigen::VectorXd& x0,
                      const SolverConfig& cfg, Trajectory& traj, SolverStats& stats);

}  // namespace mpde
