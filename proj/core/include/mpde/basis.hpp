#pragma once

/**
 * @file basis.hpp
 * @brief Periodic B-spline basis on the relative time tau in [0,1] with a
 *        C0 break at the duty cycle d.
 *
 * The open knot vector is
 *
 *   {0 (p+1 times), a_1 d, ..., a_K d, d (p times),
 *    b_1 (1-d) + d, ..., b_K (1-d) + d, 1 (p+1 times)}
 *
 * which yields 2p+2K+1 raw B-splines. The first and last raw functions are
 * merged into a single periodic "wrap" DOF, giving dof_count() = 2p+2K
 * functions ordered as [wrap, raw_1, ..., raw_{2p+2K-1}].
 *
 * Knot positions move with d. Every evaluation takes d explicitly, so one
 * SplineBasis instance serves all duty cycles; the duty stored in the knot
 * vector is only the nominal value used at construction.
 */

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace mpde {

struct KnotVector {
  std::vector<double> knots;
  int degree = 0;
  double duty = 0.5;
  int refinement = 0;
  std::vector<double> alphas;
  std::vector<double> betas;
};

/// Nonzero raw B-splines on one knot span: raw indices first..first+degree.
struct SpanValues {
  int first = 0;
  std::vector<double> values;
  std::vector<double> dtau;
};

class SplineBasis {
 public:
  /// Throws std::invalid_argument on degree < 1, d outside (0,1), or
  /// alphas/betas that are not strictly ascending in (0,1) with length K.
  SplineBasis(int degree, int refinement, std::vector<double> alphas,
              std::vector<double> betas, double duty);

  /// Refinement abscissae alpha_k = beta_k = k/(K+1).
  static SplineBasis uniform(int degree, int refinement, double duty = 0.5);

  [[nodiscard]] const KnotVector& knot_vector() const noexcept { return kv_; }
  [[nodiscard]] int degree() const noexcept { return kv_.degree; }
  [[nodiscard]] int refinement() const noexcept { return kv_.refinement; }
  [[nodiscard]] int raw_count() const noexcept { return 2 * kv_.degree + 2 * kv_.refinement + 1; }
  [[nodiscard]] int dof_count() const noexcept { return raw_count() - 1; }
  /// Periodic DOF a raw function contributes to.
  [[nodiscard]] int dof_of_raw(int raw) const noexcept {
    return raw == raw_count() - 1 ? 0 : raw;
  }

  /// Knot vector re-parameterised for duty d.
  [[nodiscard]] std::vector<double> knots_at(double d) const;

  /// Nonzero raw functions and their tau-derivatives at tau (right-sided at
  /// knots, left-sided at tau = 1).
  [[nodiscard]] SpanValues eval_span(double tau, double d) const;

  [[nodiscard]] Eigen::VectorXd eval(double tau, double d) const;
  [[nodiscard]] Eigen::VectorXd eval_dtau(double tau, double d) const;
  /// Partial derivative in d at fixed tau. Zero at tau == d, where the only
  /// nonzero function is pinned to 1 at the moving knot.
  [[nodiscard]] Eigen::VectorXd eval_dduty(double tau, double d) const;

 private:
  KnotVector kv_;
};

/// Validating factory mirroring the constructor.
SplineBasis build_basis(int degree, int refinement, std::span<const double> alphas,
                        std::span<const double> betas, double duty);

}  // namespace mpde
