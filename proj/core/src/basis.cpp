#include "mpde/basis.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mpde {
namespace {

void check_abscissae(const std::vector<double>& xs, int refinement, const char* name) {
  if (static_cast<int>(xs.size()) != refinement) {
    throw std::invalid_argument(std::string(name) + ": expected " + std::to_string(refinement) +
                                " values, got " + std::to_string(xs.size()));
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0 && xs[i] < 1.0)) {
      throw std::invalid_argument(std::string(name) + " must lie in (0,1)");
    }
    if (i > 0 && !(xs[i] > xs[i - 1])) {
      throw std::invalid_argument(std::string(name) + " must be strictly ascending");
    }
  }
}

void check_duty(double d) {
  if (!(d > 0.0 && d < 1.0)) {
    throw std::invalid_argument("duty cycle must lie in (0,1), got " + std::to_string(d));
  }
}

}  // namespace

SplineBasis::SplineBasis(int degree, int refinement, std::vector<double> alphas,
                         std::vector<double> betas, double duty) {
  if (degree < 1) {
    throw std::invalid_argument("degree must be >= 1 to represent a C0 break");
  }
  if (refinement < 0) {
    throw std::invalid_argument("refinement must be >= 0");
  }
  check_duty(duty);
  check_abscissae(alphas, refinement, "alphas");
  check_abscissae(betas, refinement, "betas");

  kv_.degree = degree;
  kv_.refinement = refinement;
  kv_.duty = duty;
  kv_.alphas = std::move(alphas);
  kv_.betas = std::move(betas);
  kv_.knots = knots_at(duty);
}

SplineBasis SplineBasis::uniform(int degree, int refinement, double duty) {
  std::vector<double> xs;
  for (int k = 1; k <= refinement; ++k) {
    xs.push_back(static_cast<double>(k) / (refinement + 1));
  }
  return SplineBasis(degree, refinement, xs, xs, duty);
}

std::vector<double> SplineBasis::knots_at(double d) const {
  const int p = kv_.degree;
  std::vector<double> u;
  u.reserve(3 * p + 2 * kv_.refinement + 2);
  u.insert(u.end(), p + 1, 0.0);
  for (double a : kv_.alphas) u.push_back(a * d);
  u.insert(u.end(), p, d);
  for (double b : kv_.betas) u.push_back(b * (1.0 - d) + d);
  u.insert(u.end(), p + 1, 1.0);
  return u;
}

// Cox-de Boor on the single nonzero span (The NURBS Book, A2.3, first
// derivative only). The span is chosen with knots[m] < knots[m+1], so the
// recursion never divides by a zero knot difference.
SpanValues SplineBasis::eval_span(double tau, double d) const {
  const int p = kv_.degree;
  const std::vector<double> u = knots_at(d);
  const int last_span = raw_count() - 1;

  tau = std::clamp(tau, 0.0, 1.0);
  int m = static_cast<int>(std::upper_bound(u.begin(), u.end(), tau) - u.begin()) - 1;
  m = std::clamp(m, p, last_span);

  std::vector<double> left(p + 1), right(p + 1);
  std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1, 0.0));
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = tau - u[m + 1 - j];
    right[j] = u[m + j] - tau;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }

  SpanValues out;
  out.first = m - p;
  out.values.resize(p + 1);
  out.dtau.resize(p + 1);
  for (int r = 0; r <= p; ++r) {
    out.values[r] = ndu[r][p];
    double der = 0.0;
    if (r >= 1) der += ndu[r - 1][p - 1] / ndu[p][r - 1];
    if (r <= p - 1) der -= ndu[r][p - 1] / ndu[p][r];
    out.dtau[r] = p * der;
  }
  return out;
}

Eigen::VectorXd SplineBasis::eval(double tau, double d) const {
  const SpanValues sv = eval_span(tau, d);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dof_count());
  for (int r = 0; r <= degree(); ++r) out[dof_of_raw(sv.first + r)] += sv.values[r];
  return out;
}

Eigen::VectorXd SplineBasis::eval_dtau(double tau, double d) const {
  const SpanValues sv = eval_span(tau, d);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dof_count());
  for (int r = 0; r <= degree(); ++r) out[dof_of_raw(sv.first + r)] += sv.dtau[r];
  return out;
}

// Left of d every function is a polynomial in tau/d, right of d a polynomial
// in (tau-d)/(1-d), with d-independent coefficients. The chain rule then
// turns the d-derivative into a scaled tau-derivative.
Eigen::VectorXd SplineBasis::eval_dduty(double tau, double d) const {
  if (tau == d) return Eigen::VectorXd::Zero(dof_count());
  const double scale = tau < d ? -tau / d : -(1.0 - tau) / (1.0 - d);
  return scale * eval_dtau(tau, d);
}

SplineBasis build_basis(int degree, int refinement, std::span<const double> alphas,
                        std::span<const double> betas, double duty) {
  return SplineBasis(degree, refinement, std::vector<double>(alphas.begin(), alphas.end()),
                     std::vector<double>(betas.begin(), betas.end()), duty);
}

}  // namespace mpde
