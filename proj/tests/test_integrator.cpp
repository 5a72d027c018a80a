#include <catch_amalgamated.hpp>

#include "mpde/circuit.hpp"
#include "mpde/error.hpp"
#include "mpde/integrator.hpp"

#include <cmath>
#include <stdexcept>

using Catch::Approx;
using mpde::DescriptorSystem;
using mpde::SolverConfig;

namespace {

DescriptorSystem scalar(double m, double n, double f) {
  return DescriptorSystem::constant(Eigen::MatrixXd::Constant(1, 1, m),
                                    Eigen::MatrixXd::Constant(1, 1, n),
                                    Eigen::VectorXd::Constant(1, f));
}

SolverConfig tol(double t) {
  SolverConfig c;
  c.abstol = t;
  c.reltol = t;
  return c;
}

double decay_error(double h) {
  SolverConfig c;
  c.fixed_step = h;
  const auto r = mpde::integrate(scalar(1, 1, 0), 0.0, 1.0, Eigen::VectorXd::Ones(1), c);
  return std::abs(r.trajectory.state(r.trajectory.size() - 1)[0] - std::exp(-1.0));
}

}  // namespace

TEST_CASE("scalar decay", "[integrator]") {
  const auto r = mpde::integrate(scalar(1, 1, 0), 0.0, 1.0, Eigen::VectorXd::Ones(1), tol(1e-8));
  const auto& traj = r.trajectory;
  CHECK(traj.end_time() == 1.0);
  CHECK(traj.state(traj.size() - 1)[0] == Approx(std::exp(-1.0)).margin(1e-6));
  CHECK(traj.dense_eval(0.5)[0] == Approx(std::exp(-0.5)).margin(10 * 1e-8 + 1e-7));
}

TEST_CASE("constant forcing is integrated exactly", "[integrator]") {
  const auto r = mpde::integrate(scalar(1, 0, 1), 0.0, 2.0, Eigen::VectorXd::Zero(1), tol(1e-6));
  CHECK(r.trajectory.state(r.trajectory.size() - 1)[0] == Approx(2.0).margin(1e-10));
}

TEST_CASE("buck converges to its DC operating point", "[integrator]") {
  const auto c = mpde::buck_circuit(mpde::BuckParameters{});
  const auto sys = DescriptorSystem::constant(c.A, c.B, 350.0 * c.pwm_coupling);
  const auto r = mpde::integrate(sys, 0.0, 0.05, c.x0, tol(1e-9));
  const double v = r.trajectory.state(r.trajectory.size() - 1)[1];
  CHECK(v == Approx(350.0 * 20.0 / 20.01).epsilon(1e-3));
}

TEST_CASE("fixed-step BDF2 converges at second order", "[integrator]") {
  double prev = decay_error(0.02);
  for (double h : {0.01, 0.005, 0.0025}) {
    const double e = decay_error(h);
    CHECK(prev / e >= 3.5);
    prev = e;
  }
}

TEST_CASE("tightening the tolerance does not increase the error", "[integrator]") {
  double prev = 1e300;
  for (double t : {1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
    const auto r = mpde::integrate(scalar(1, 1, 0), 0.0, 1.0, Eigen::VectorXd::Ones(1), tol(t));
    const double e = std::abs(r.trajectory.state(r.trajectory.size() - 1)[0] - std::exp(-1.0));
    CHECK(e <= 2.0 * prev);
    prev = e;
  }
}

TEST_CASE("stats are consistent", "[integrator]") {
  const auto c = mpde::buck_circuit(mpde::BuckParameters{});
  const auto sys = DescriptorSystem::constant(c.A, c.B, 350.0 * c.pwm_coupling);
  const auto r = mpde::integrate(sys, 0.0, 0.02, c.x0, tol(1e-6));
  const auto& s = r.stats;
  CHECK(s.accepted_steps == static_cast<long>(r.trajectory.size()) - 1);
  CHECK(s.accepted_steps > 0);
  CHECK(s.failed_steps >= 0);
  CHECK(s.starts == 1);
  CHECK(s.lu_factorizations <= s.accepted_steps + s.failed_steps + s.starts);
  CHECK(s.linear_solves >= s.accepted_steps);
  CHECK(s.function_evaluations > 0);
}

TEST_CASE("time-varying systems are refactored every step", "[integrator]") {
  // x' + (1 + t) x = 0, x(0) = 1  ->  x = exp(-t - t^2/2)
  DescriptorSystem sys;
  sys.dim = 1;
  sys.mass = [](double, Eigen::MatrixXd& m) { m = Eigen::MatrixXd::Ones(1, 1); };
  sys.stiffness = [](double t, Eigen::MatrixXd& n) { n = Eigen::MatrixXd::Constant(1, 1, 1 + t); };
  sys.forcing = [](double, Eigen::VectorXd& f) { f = Eigen::VectorXd::Zero(1); };
  const auto r = mpde::integrate(sys, 0.0, 1.0, Eigen::VectorXd::Ones(1), tol(1e-8));
  CHECK(r.trajectory.state(r.trajectory.size() - 1)[0] == Approx(std::exp(-1.5)).margin(1e-6));
  CHECK(r.stats.lu_factorizations >= r.stats.accepted_steps);
}

TEST_CASE("max step is respected", "[integrator]") {
  SolverConfig c = tol(1e-3);
  c.max_step = 0.01;
  const auto r = mpde::integrate(scalar(1, 0, 1), 0.0, 1.0, Eigen::VectorXd::Zero(1), c);
  const auto& t = r.trajectory.times();
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] - t[i - 1] <= 0.01 * (1 + 1e-12));
  CHECK(r.stats.accepted_steps >= 100);
}

TEST_CASE("dense output reproduces stored steps and constants", "[integrator]") {
  const auto r = mpde::integrate(scalar(1, 1, 0), 0.0, 1.0, Eigen::VectorXd::Ones(1), tol(1e-6));
  const auto& traj = r.trajectory;
  for (std::size_t i = 0; i < traj.size(); ++i)
    CHECK(traj.dense_eval(traj.time(i))[0] == traj.state(i)[0]);

  const auto flat = mpde::integrate(scalar(1, 1, 3), 0.0, 1.0, Eigen::VectorXd::Constant(1, 3),
                                    tol(1e-6));
  for (double t : {0.0, 0.123, 0.5, 0.999, 1.0})
    CHECK(flat.trajectory.dense_eval(t)[0] == Approx(3.0).margin(1e-12));
}

TEST_CASE("dense evaluation is continuous across steps", "[integrator]") {
  const auto r = mpde::integrate(scalar(1, 1, 0), 0.0, 2.0, Eigen::VectorXd::Ones(1), tol(1e-5));
  const auto& traj = r.trajectory;
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    const double t = traj.time(i);
    const double eps = 1e-12 * (traj.time(i + 1) - traj.time(i - 1));
    CHECK(traj.dense_eval(t - eps)[0] == Approx(traj.dense_eval(t + eps)[0]).margin(1e-9));
  }
}

TEST_CASE("trajectory rejects out-of-span queries", "[integrator][errors]") {
  const auto r = mpde::integrate(scalar(1, 1, 0), 0.0, 1.0, Eigen::VectorXd::Ones(1), tol(1e-4));
  CHECK_THROWS_AS(r.trajectory.dense_eval(1.5), std::out_of_range);
  CHECK_THROWS_AS(r.trajectory.linear_eval(-0.1), std::out_of_range);
}

TEST_CASE("linear trajectories interpolate linearly", "[integrator]") {
  mpde::Trajectory t(1, false);
  t.push_initial(0.0, Eigen::VectorXd::Constant(1, 1.0));
  t.push_sample(1.0, Eigen::VectorXd::Constant(1, 3.0));
  CHECK(t.linear_eval(0.25, 0) == Approx(1.5));
  CHECK(t.dense_eval(0.25, 0) == Approx(1.5));
  CHECK(t.component(0) == std::vector<double>{1.0, 3.0});
}

TEST_CASE("invalid configurations are rejected", "[integrator][errors]") {
  SolverConfig c;
  c.abstol = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SolverConfig{};
  c.max_order = 3;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SolverConfig{};
  c.max_step = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_THROWS_AS(mpde::integrate(scalar(1, 1, 0), 0.0, 1.0, Eigen::VectorXd::Ones(2), tol(1e-3)),
                  std::invalid_argument);
}

TEST_CASE("singular step matrix aborts", "[integrator][errors]") {
  try {
    (void)mpde::integrate(scalar(0, 0, 1), 0.0, 1.0, Eigen::VectorXd::Zero(1), tol(1e-3));
    FAIL("expected a solver error");
  } catch (const mpde::SolverError& e) {
    CHECK(e.code() == "singular_step_matrix");
  }
}

TEST_CASE("step size underflow aborts", "[integrator][errors]") {
  // Finite-time blow-up of x' = x^2 modelled as x' - t_c/(t_c - t)^2 = 0.
  DescriptorSystem sys;
  sys.dim = 1;
  sys.mass = [](double, Eigen::MatrixXd& m) { m = Eigen::MatrixXd::Ones(1, 1); };
  sys.stiffness = [](double, Eigen::MatrixXd& n) { n = Eigen::MatrixXd::Zero(1, 1); };
  sys.forcing = [](double t, Eigen::VectorXd& f) {
    f = Eigen::VectorXd::Constant(1, 1.0 / ((0.5 - t) * (0.5 - t)));
  };
  try {
    (void)mpde::integrate(sys, 0.0, 1.0, Eigen::VectorXd::Ones(1), tol(1e-8));
    FAIL("expected a solver error");
  } catch (const mpde::SolverError& e) {
    CHECK(e.code() == "step_size_underflow");
  }
}
