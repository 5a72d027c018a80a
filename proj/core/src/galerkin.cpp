#include "mpde/galerkin.hpp"

#include "mpde/circuit.hpp"
#include "mpde/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mpde {

QuadratureRule QuadratureRule::gauss_legendre(int points) {
  if (points < 1) throw std::invalid_argument("quadrature needs at least one point");
  QuadratureRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  const int n = points;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

namespace {

// Visits every quadrature point of every nonempty knot span with the raw
// span values. `visit(tau, weight, span_values)`; weight includes the span
// Jacobian.
template <typename Visit>
void for_each_quadrature_point(const SplineBasis& basis, double d, Visit&& visit) {
  const std::vector<double> u = basis.knots_at(d);
  const QuadratureRule rule = QuadratureRule::gauss_legendre(basis.degree() + 1);
  for (std::size_t m = 0; m + 1 < u.size(); ++m) {
    const double a = u[m], b = u[m + 1];
    if (!(b > a)) continue;
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int q = 0; q < rule.size(); ++q) {
      const double tau = mid + half * rule.nodes[q];
      visit(tau, half * rule.weights[q], basis.eval_span(tau, d));
    }
  }
}

}  // namespace

Eigen::MatrixXd assemble_mass(const SplineBasis& basis, double d, double Ts) {
  const int n = basis.dof_count();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  const int p = basis.degree();
  for_each_quadrature_point(basis, d, [&](double, double w, const SpanValues& sv) {
    for (int r = 0; r <= p; ++r) {
      const int i = basis.dof_of_raw(sv.first + r);
      for (int s = 0; s <= p; ++s) {
        const int j = basis.dof_of_raw(sv.first + s);
        out(i, j) += w * sv.values[r] * sv.values[s];
      }
    }
  });
  return Ts * out;
}

Eigen::MatrixXd assemble_transport(const SplineBasis& basis, double d) {
  const int n = basis.dof_count();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  const int p = basis.degree();
  for_each_quadrature_point(basis, d, [&](double, double w, const SpanValues& sv) {
    for (int r = 0; r <= p; ++r) {
      const int i = basis.dof_of_raw(sv.first + r);
      for (int s = 0; s <= p; ++s) {
        const int j = basis.dof_of_raw(sv.first + s);
        out(i, j) -= w * sv.dtau[r] * sv.values[s];
      }
    }
  });
  return out;
}

Eigen::MatrixXd assemble_duty_drift(const SplineBasis& basis, double d, double Ts) {
  const int n = basis.dof_count();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  const int p = basis.degree();
  for_each_quadrature_point(basis, d, [&](double tau, double w, const SpanValues& sv) {
    // Same chain rule as SplineBasis::eval_dduty; quadrature points never sit on tau == d.
    const double scale = tau < d ? -tau / d : -(1.0 - tau) / (1.0 - d);
    for (int r = 0; r <= p; ++r) {
      const int i = basis.dof_of_raw(sv.first + r);
      for (int s = 0; s <= p; ++s) {
        const int j = basis.dof_of_raw(sv.first + s);
        out(i, j) += w * sv.values[r] * scale * sv.dtau[s];
      }
    }
  });
  return Ts * out;
}

Eigen::VectorXd assemble_pwm_load(const SplineBasis& basis, double d, double Ts) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.dof_count());
  const int p = basis.degree();
  // Spans never straddle d because d is a knot.
  for_each_quadrature_point(basis, d, [&](double tau, double w, const SpanValues& sv) {
    const double sign = tau <= d ? 1.0 : -1.0;
    for (int r = 0; r <= p; ++r) out[basis.dof_of_raw(sv.first + r)] += sign * w * sv.values[r];
  });
  return Ts * out;
}

double relative_difference(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  if (scale == 0.0) return 0.0;
  return (a - b).norm() / scale;
}

AffineMatrix affine_decompose(const std::function<Eigen::MatrixXd(double)>& assemble_at,
                              const AffineProbe& probe, double unit) {
  const Eigen::MatrixXd m0 = assemble_at(probe.d0);
  const Eigen::MatrixXd m1 = assemble_at(probe.d1);
  AffineMatrix out;
  out.slope = (m0 - m1) / (probe.d0 - probe.d1);
  out.constant = m0 - probe.d0 * out.slope;

  const Eigen::MatrixXd direct = assemble_at(probe.check);
  const Eigen::MatrixXd fitted = out.at(probe.check);
  const double scale = std::max({out.constant.norm(), direct.norm(), unit});
  const double mismatch = (direct - fitted).norm();
  if (scale > 0.0 && mismatch > probe.rel_tol * scale) {
    std::ostringstream msg;
    msg << "affine decomposition check failed at d=" << probe.check
        << ": relative mismatch " << mismatch / scale;
    throw SolverError("affine_check_failed", msg.str());
  }
  return out;
}

AffineVector affine_decompose_vector(const std::function<Eigen::VectorXd(double)>& assemble_at,
                                     const AffineProbe& probe, double unit) {
  const AffineMatrix m = affine_decompose(
      [&](double d) -> Eigen::MatrixXd { return assemble_at(d); }, probe, unit);
  return AffineVector{m.constant.col(0), m.slope.col(0)};
}

GalerkinOperators GalerkinOperators::build(const SplineBasis& basis, double Ts,
                                           const AffineProbe& probe) {
  GalerkinOperators ops;
  // Q and U vanish identically for the plain hat basis; their natural units
  // keep the check from comparing rounding noise with itself.
  ops.mass = affine_decompose([&](double d) { return assemble_mass(basis, d, Ts); }, probe, Ts);
  ops.transport =
      affine_decompose([&](double d) { return assemble_transport(basis, d); }, probe, 1.0);
  ops.duty_drift =
      affine_decompose([&](double d) { return assemble_duty_drift(basis, d, Ts); }, probe, Ts);
  ops.pwm_load = affine_decompose_vector(
      [&](double d) { return assemble_pwm_load(basis, d, Ts); }, probe, Ts);
  return ops;
}

PwmProjection::PwmProjection(AffineVector load, Eigen::VectorXd coupling)
    : load_(std::move(load)), coupling_(std::move(coupling)) {}

PwmProjection::PwmProjection(const SplineBasis& basis, double Ts, Eigen::VectorXd coupling)
    : PwmProjection(
          affine_decompose_vector([&](double d) { return assemble_pwm_load(basis, d, Ts); }, {},
                                  Ts),
          std::move(coupling)) {}

void PwmProjection::evaluate_into(double v_peak, double d, Eigen::Ref<Eigen::VectorXd> out) const {
  const Eigen::Index nb = load_.constant.size();
  const Eigen::VectorXd block = v_peak * load_.at(d);
  for (Eigen::Index j = 0; j < coupling_.size(); ++j) {
    out.segment(j * nb, nb) = coupling_[j] * block;
  }
}

Eigen::VectorXd PwmProjection::evaluate(const PwmExcitation& exc, double t1) const {
  Eigen::VectorXd out(coupling_.size() * load_.constant.size());
  evaluate_into(exc.v_peak, exc.duty.value(t1), out);
  return out;
}

Eigen::VectorXd project_rhs(const PwmProjection& projection, const PwmExcitation& exc, double t1) {
  return projection.evaluate(exc, t1);
}

}  // namespace mpde
