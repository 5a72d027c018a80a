#pragma once

/**
 * @file mpde.hpp
 * @brief Reduced envelope system of the multirate formulation and the
 *        reconstruction x(t) = x_hat(t, t).
 *
 * The solution is expanded as x_j(t1, t2) = P(tau(t2), d(t1))^T w_j(t1).
 * Galerkin testing over one switching period yields
 *
 *   A(t1) w' + B(t1) w = C(t1)
 *   A(t1) = A (x) I(d)
 *   B(t1) = B (x) I(d) + A (x) Q + d'(t1) A (x) U
 *
 * with state-major coefficient blocks. All operators are evaluated from
 * their affine-in-d parts; no quadrature happens during time stepping.
 */

#include "mpde/basis.hpp"
#include "mpde/circuit.hpp"
#include "mpde/galerkin.hpp"
#include "mpde/integrator.hpp"
#include "mpde/trajectory.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace mpde {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

class ReducedSystem {
 public:
  ReducedSystem(LinearCircuit circuit, SplineBasis basis, PwmExcitation excitation,
                const AffineProbe& probe = {});

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] const LinearCircuit& circuit() const noexcept { return circuit_; }
  [[nodiscard]] const SplineBasis& basis() const noexcept { return basis_; }
  [[nodiscard]] const PwmExcitation& excitation() const noexcept { return excitation_; }
  [[nodiscard]] const GalerkinOperators& operators() const noexcept { return ops_; }

  void mass(double t1, Eigen::MatrixXd& out) const;
  void stiffness(double t1, Eigen::MatrixXd& out) const;
  void forcing(double t1, Eigen::VectorXd& out) const;
  [[nodiscard]] Eigen::MatrixXd mass(double t1) const;
  [[nodiscard]] Eigen::MatrixXd stiffness(double t1) const;
  [[nodiscard]] Eigen::VectorXd forcing(double t1) const;

  /// Same operators from fresh quadrature at d(t1); verification only.
  [[nodiscard]] Eigen::MatrixXd stiffness_direct(double t1) const;
  [[nodiscard]] Eigen::MatrixXd mass_direct(double t1) const;
  [[nodiscard]] Eigen::VectorXd forcing_direct(double t1) const;

  /// View for the integrator; references *this, which must outlive it.
  [[nodiscard]] DescriptorSystem descriptor() const;

 private:
  LinearCircuit circuit_;
  SplineBasis basis_;
  PwmExcitation excitation_;
  GalerkinOperators ops_;
  PwmProjection projection_;
  int dim_ = 0;
  bool constant_duty_ = false;

  Eigen::MatrixXd mass0_, mass1_;
  Eigen::MatrixXd stiff0_, stiff1_;
  Eigen::MatrixXd drift0_, drift1_;
};

ReducedSystem build_reduced(const LinearCircuit& circuit, const SplineBasis& basis,
                            const PwmExcitation& excitation);

enum class InitMode {
  /// Periodic steady state of the reduced system at t0, shifted per state so
  /// that x_hat(t0, t0) = x0.
  steady_shift,
  /// Flat ripple: every coefficient of state j equals x0_j.
  zero,
};

/// Steady-state coefficients w^s = B(t1)^{-1} C(t1). Throws
/// SolverError("singular_steady_state") if B(t1) is singular.
Eigen::VectorXd steady_state_coefficients(const ReducedSystem& rsys, double t1 = 0.0);
Eigen::VectorXd steady_state_init(const ReducedSystem& rsys, const Eigen::VectorXd& x0,
                                  double t0 = 0.0);

struct MpdeSolution {
  Trajectory envelope;
  SplineBasis basis;
  PwmExcitation excitation;
  int states = 0;

  /// x_hat(t, t) for one state.
  [[nodiscard]] double value(double t, int state) const;
  [[nodiscard]] Eigen::VectorXd value(double t) const;
};

struct MpdeResult {
  MpdeSolution solution;
  SolverStats stats;
};

MpdeResult solve_mpde(const ReducedSystem& rsys, double t0, double t1, const SolverConfig& cfg,
                      InitMode init = InitMode::steady_shift);

/// Samples x(t) = x_hat(t, t) at the given times (ascending, inside the solve
/// span). The basis is evaluated at tau = t/Ts mod 1 and the current d(t).
Trajectory reconstruct(const MpdeSolution& sol, std::span<const double> times);

}  // namespace mpde
