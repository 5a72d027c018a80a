#pragma once

/**
 * @file galerkin.hpp
 * @brief Galerkin matrices of the periodic spline basis over one switching
 *        period and their affine dependence on the duty cycle.
 *
 * With P(tau, d) the vector of periodic basis functions:
 *
 *   mass        I(d) =  Ts * int_0^1 P P^T dtau
 *   transport   Q(d) = -     int_0^1 dP/dtau P^T dtau
 *   duty drift  U(d) =  Ts * int_0^1 P dP^T/dd dtau
 *
 * I is affine in d; Q and U do not depend on d. The PWM excitation projects
 * onto Ts * (int_0^d P - int_d^1 P), which is affine in d as well.
 */

#include "mpde/basis.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace mpde {

class PwmExcitation;

/// Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  static QuadratureRule gauss_legendre(int points);
  [[nodiscard]] int size() const noexcept { return static_cast<int>(nodes.size()); }
};

/// M(d) = constant + d * slope.
struct AffineMatrix {
  Eigen::MatrixXd constant;
  Eigen::MatrixXd slope;

  [[nodiscard]] Eigen::MatrixXd at(double d) const { return constant + d * slope; }
};

struct AffineVector {
  Eigen::VectorXd constant;
  Eigen::VectorXd slope;

  [[nodiscard]] Eigen::VectorXd at(double d) const { return constant + d * slope; }
};

// Span-wise Gauss quadrature with degree+1 points per nonempty knot span.
Eigen::MatrixXd assemble_mass(const SplineBasis& basis, double d, double Ts);
Eigen::MatrixXd assemble_transport(const SplineBasis& basis, double d);
Eigen::MatrixXd assemble_duty_drift(const SplineBasis& basis, double d, double Ts);
/// Ts * (int_0^d P dtau - int_d^1 P dtau); sign(0) counts as on-state.
Eigen::VectorXd assemble_pwm_load(const SplineBasis& basis, double d, double Ts);

/// Duty values used to fit and check affine decompositions.
struct AffineProbe {
  double d0 = 0.25;
  double d1 = 0.75;
  double check = 0.5;
  double rel_tol = 1e-10;
};

/// Fits M(d) through d0 and d1 and verifies the fit at `check`. Throws
/// SolverError("affine_check_failed") when the mismatch exceeds rel_tol times
/// max(||M0||, ||M(check)||, unit). `unit` is the natural size of the
/// operator and only matters when it vanishes identically.
AffineMatrix affine_decompose(const std::function<Eigen::MatrixXd(double)>& assemble_at,
                              const AffineProbe& probe = {}, double unit = 0.0);
AffineVector affine_decompose_vector(const std::function<Eigen::VectorXd(double)>& assemble_at,
                                     const AffineProbe& probe = {}, double unit = 0.0);

/// Relative distance ||a - b|| / max(||a||, ||b||); 0 when both vanish.
double relative_difference(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// All affine parts for one basis and switching period.
struct GalerkinOperators {
  AffineMatrix mass;
  AffineMatrix transport;
  AffineMatrix duty_drift;
  AffineVector pwm_load;

  static GalerkinOperators build(const SplineBasis& basis, double Ts,
                                 const AffineProbe& probe = {});
};

/// Right-hand side C(t1) of the reduced system, evaluated from a precomputed
/// affine decomposition of the PWM load.
class PwmProjection {
 public:
  PwmProjection(AffineVector load, Eigen::VectorXd coupling);
  PwmProjection(const SplineBasis& basis, double Ts, Eigen::VectorXd coupling);

  /// Stacked state-major vector of length coupling.size() * dof_count.
  [[nodiscard]] Eigen::VectorXd evaluate(const PwmExcitation& exc, double t1) const;
  void evaluate_into(double v_peak, double d, Eigen::Ref<Eigen::VectorXd> out) const;
  [[nodiscard]] const AffineVector& load() const noexcept { return load_; }

 private:
  AffineVector load_;
  Eigen::VectorXd coupling_;
};

Eigen::VectorXd project_rhs(const PwmProjection& projection, const PwmExcitation& exc, double t1);

}  // namespace mpde
