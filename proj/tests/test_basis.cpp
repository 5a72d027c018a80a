#include <catch_amalgamated.hpp>

#include "mpde/basis.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <vector>

using Catch::Approx;
using mpde::SplineBasis;

namespace {

void require_knots(const std::vector<double>& got, const std::vector<double>& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(got[i] == Approx(want[i]).margin(1e-15));
}

}  // namespace

TEST_CASE("knot vector of a quadratic with one refinement", "[basis]") {
  const SplineBasis b(2, 1, {0.5}, {0.5}, 0.7);
  require_knots(b.knot_vector().knots, {0, 0, 0, 0.35, 0.7, 0.7, 0.85, 1, 1, 1});
  CHECK(b.raw_count() == 7);
  CHECK(b.dof_count() == 6);
}

TEST_CASE("knot vector of the plain hat basis", "[basis]") {
  const auto b = SplineBasis::uniform(1, 0, 0.5);
  require_knots(b.knot_vector().knots, {0, 0, 0.5, 1, 1});
  CHECK(b.raw_count() == 3);
  CHECK(b.dof_count() == 2);
}

TEST_CASE("high order setting counts", "[basis]") {
  const SplineBasis b(3, 3, {0.25, 0.5, 0.75}, {0.25, 0.5, 0.75}, 0.5);
  CHECK(b.raw_count() == 13);
  CHECK(b.dof_count() == 12);
  CHECK(b.knot_vector().knots.size() == 3u * 3 + 2 * 3 + 2);
}

TEST_CASE("knot multiplicities follow the layout", "[basis]") {
  for (int p = 1; p <= 4; ++p) {
    for (int K = 0; K <= 3; ++K) {
      const auto b = SplineBasis::uniform(p, K, 0.37);
      const auto& u = b.knot_vector().knots;
      REQUIRE(static_cast<int>(u.size()) == 3 * p + 2 * K + 2);
      CHECK(std::count(u.begin(), u.end(), 0.0) == p + 1);
      CHECK(std::count(u.begin(), u.end(), 1.0) == p + 1);
      CHECK(std::count(u.begin(), u.end(), 0.37) == p);
      CHECK(std::is_sorted(u.begin(), u.end()));
    }
  }
}

TEST_CASE("knots move with the duty", "[basis]") {
  const SplineBasis b(2, 1, {0.5}, {0.5}, 0.7);
  require_knots(b.knots_at(0.4), {0, 0, 0, 0.2, 0.4, 0.4, 0.7, 1, 1, 1});
}

TEST_CASE("invalid basis parameters are rejected", "[basis][errors]") {
  CHECK_THROWS_AS(SplineBasis::uniform(0, 1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(SplineBasis::uniform(2, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(SplineBasis::uniform(2, 1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SplineBasis::uniform(2, 1, -0.2), std::invalid_argument);
  CHECK_THROWS_AS(SplineBasis(2, 2, {0.6, 0.4}, {0.3, 0.6}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(SplineBasis(2, 2, {0.4, 0.4}, {0.3, 0.6}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(SplineBasis(2, 1, {1.0}, {0.5}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(SplineBasis(2, 1, {0.5}, {0.0}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(SplineBasis(2, 2, {0.5}, {0.3, 0.6}, 0.5), std::invalid_argument);
  const std::vector<double> a{0.5};
  CHECK_THROWS_AS(mpde::build_basis(2, 1, a, a, 1.5), std::invalid_argument);
  CHECK_NOTHROW(mpde::build_basis(2, 1, a, a, 0.5));
}

TEST_CASE("hat basis values and slopes", "[basis]") {
  const auto b = SplineBasis::uniform(1, 0, 0.5);
  const auto v = b.eval(0.25, 0.5);
  CHECK(v[0] == Approx(0.5));
  CHECK(v[1] == Approx(0.5));
  const auto dv = b.eval_dtau(0.25, 0.5);
  CHECK(dv[0] == Approx(-2.0));
  CHECK(dv[1] == Approx(2.0));
}

TEST_CASE("tau = 0 selects the wrap function", "[basis]") {
  for (int p = 1; p <= 3; ++p) {
    const auto b = SplineBasis::uniform(p, 2, 0.3);
    const auto v = b.eval(0.0, 0.3);
    CHECK(v[0] == Approx(1.0).margin(1e-15));
    CHECK(v.tail(v.size() - 1).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("partition of unity and non-negativity", "[basis]") {
  const auto b = SplineBasis::uniform(2, 1, 0.7);
  CHECK(b.eval(0.37, 0.7).sum() == Approx(1.0).margin(1e-14));
  for (const auto& [p, K] : {std::pair{1, 1}, {2, 1}, {3, 3}}) {
    const auto basis = SplineBasis::uniform(p, K, 0.5);
    for (double d : {0.1, 0.5, 0.9}) {
      double worst = 0.0, lowest = 1.0;
      for (int i = 0; i < 1000; ++i) {
        const auto v = basis.eval(i / 999.0, d);
        worst = std::max(worst, std::abs(v.sum() - 1.0));
        lowest = std::min(lowest, v.minCoeff());
      }
      CHECK(worst <= 1e-12);
      CHECK(lowest >= -1e-14);
    }
  }
}

TEST_CASE("periodic closure is exact", "[basis]") {
  for (const auto& [p, K] : {std::pair{1, 0}, {1, 1}, {2, 1}, {3, 3}}) {
    const auto b = SplineBasis::uniform(p, K, 0.5);
    for (double d : {0.2, 0.5, 0.8}) {
      const Eigen::VectorXd diff = b.eval(0.0, d) - b.eval(1.0, d);
      CHECK(diff.cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("continuity at the duty break", "[basis]") {
  for (int p = 1; p <= 3; ++p) {
    const auto b = SplineBasis::uniform(p, 1, 0.5);
    const double d = 0.6;
    const double eps = 1e-15;
    const Eigen::VectorXd left = b.eval(d - eps, d);
    const Eigen::VectorXd right = b.eval(d + eps, d);
    CHECK((left - right).cwiseAbs().maxCoeff() <= 1e-12);
    if (p >= 2) {
      const Eigen::VectorXd dl = b.eval_dtau(d - 1e-9, d);
      const Eigen::VectorXd dr = b.eval_dtau(d + 1e-9, d);
      CHECK((dl - dr).cwiseAbs().maxCoeff() > 1.0);
    }
  }
}

TEST_CASE("interior refinement knots are smooth", "[basis]") {
  // C^{p-1} at simple knots: for p = 3 values and first derivatives agree.
  const auto b = SplineBasis::uniform(3, 1, 0.5);
  const double knot = 0.25;  // alpha = 1/2 at d = 0.5
  const double eps = 1e-9;
  const Eigen::VectorXd dl = b.eval_dtau(knot - eps, 0.5);
  const Eigen::VectorXd dr = b.eval_dtau(knot + eps, 0.5);
  CHECK((dl - dr).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("values match the naive recursion", "[basis][oracle]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (const auto& [p, K] : {std::pair{1, 1}, {2, 1}, {3, 3}, {4, 2}}) {
    const auto b = SplineBasis::uniform(p, K, 0.5);
    for (int i = 0; i < 100; ++i) {
      const double d = 0.05 + 0.9 * U(rng);
      const double tau = U(rng);
      CHECK(oracle::max_rel(oracle::periodic(b, tau, d), b.eval(tau, d)) <= 1e-13);
      const Eigen::VectorXd dt = b.eval_dtau(tau, d);
      const Eigen::VectorXd want = oracle::periodic(b, tau, d, true);
      CHECK((dt - want).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, want.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("tau derivative matches finite differences", "[basis][oracle]") {
  const auto b = SplineBasis::uniform(2, 1, 0.7);
  const double h = 1e-7;
  const Eigen::VectorXd fd = (b.eval(0.1 + h, 0.7) - b.eval(0.1 - h, 0.7)) / (2 * h);
  CHECK((b.eval_dtau(0.1, 0.7) - fd).cwiseAbs().maxCoeff() <= 1e-5);
  CHECK(b.eval_dtau(0.1, 0.7).sum() == Approx(0.0).margin(1e-11));
}

TEST_CASE("duty derivative matches finite differences", "[basis][oracle]") {
  const auto b = SplineBasis::uniform(2, 1, 0.6);
  const double h = 1e-6;
  const Eigen::VectorXd fd = (b.eval(0.3, 0.6 + h) - b.eval(0.3, 0.6 - h)) / (2 * h);
  CHECK((b.eval_dduty(0.3, 0.6) - fd).cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("duty derivative vanishes on the moving knot of the hat basis", "[basis]") {
  const auto b = SplineBasis::uniform(1, 0, 0.5);
  for (double d : {0.2, 0.5, 0.85}) {
    const auto v = b.eval_dduty(d, d);
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 0.0);
  }
}

TEST_CASE("derivatives agree with finite differences at random points", "[basis][oracle]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (const auto& [p, K] : {std::pair{1, 1}, {2, 1}, {3, 3}}) {
    const auto b = SplineBasis::uniform(p, K, 0.5);
    int checked = 0;
    while (checked < 100) {
      const double d = 0.1 + 0.8 * U(rng);
      const double tau = 0.01 + 0.98 * U(rng);
      // Keep both stencils inside one knot span.
      const auto u = b.knots_at(d);
      bool near = false;
      for (double k : u) near = near || std::abs(k - tau) < 1e-3;
      for (double k : b.knots_at(d + 1e-6)) near = near || std::abs(k - tau) < 1e-3;
      if (near) continue;
      ++checked;
      const double ht = 1e-7;
      const Eigen::VectorXd fdt = (b.eval(tau + ht, d) - b.eval(tau - ht, d)) / (2 * ht);
      CHECK((b.eval_dtau(tau, d) - fdt).cwiseAbs().maxCoeff() <= 1e-5);
      const double hd = 1e-6;
      const Eigen::VectorXd fdd = (b.eval(tau, d + hd) - b.eval(tau, d - hd)) / (2 * hd);
      CHECK((b.eval_dduty(tau, d) - fdd).cwiseAbs().maxCoeff() <= 1e-4);
      CHECK(std::abs(b.eval_dtau(tau, d).sum()) <= 1e-10);
      CHECK(std::abs(b.eval_dduty(tau, d).sum()) <= 1e-10);
    }
  }
}

TEST_CASE("span values list degree+1 functions", "[basis]") {
  const auto b = SplineBasis::uniform(3, 2, 0.4);
  const auto s = b.eval_span(0.55, 0.4);
  CHECK(s.values.size() == 4u);
  CHECK(s.dtau.size() == 4u);
  double sum = 0.0;
  for (double v : s.values) sum += v;
  CHECK(sum == Approx(1.0).margin(1e-14));
  CHECK(b.dof_of_raw(b.raw_count() - 1) == 0);
  CHECK(b.dof_of_raw(3) == 3);
}
