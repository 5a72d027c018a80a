#include "mpde/reference.hpp"

#include "mpde/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mpde {

std::vector<double> EventGrid::merged() const {
  std::vector<double> out;
  out.reserve(switch_times.size() + period_starts.size());
  std::merge(switch_times.begin(), switch_times.end(), period_starts.begin(), period_starts.end(),
             std::back_inserter(out));
  return out;
}

EventGrid find_switch_times(const PwmExcitation& exc, double t0, double t1) {
  EventGrid grid;
  const double Ts = exc.period();
  grid.period = Ts;
  if (!exc.switching()) return grid;

  const auto first = static_cast<long>(std::floor(t0 / Ts));
  const auto last = static_cast<long>(std::ceil(t1 / Ts));
  for (long k = first; k < last; ++k) {
    const double start = k * Ts;
    if (start > t0 && start < t1) grid.period_starts.push_back(start);

    // g(theta) = d((k + theta) Ts) - theta on theta in [0, 1): positive at 0,
    // negative near 1, decreasing since d varies slowly.
    auto g = [&](double theta) { return exc.duty.value((k + theta) * Ts) - theta; };
    double lo = 0.0, hi = 1.0;
    if (!(g(lo) > 0.0) || !(g(hi) < 0.0)) {
      std::ostringstream msg;
      msg << "duty cycle does not cross the carrier in period " << k;
      throw SolverError("no_duty_crossing", msg.str());
    }
    double mid = 0.5;
    for (int it = 0; it < 50; ++it) {
      mid = 0.5 * (lo + hi);
      const double gm = g(mid);
      if (gm == 0.0) break;
      (gm > 0.0 ? lo : hi) = mid;
      if (std::abs(gm) <= 1e-16) break;
    }
    const double t_star = (k + mid) * Ts;
    if (t_star > t0 && t_star < t1) grid.switch_times.push_back(t_star);
  }
  return grid;
}

SolverConfig reference_defaults(const PwmExcitation& exc, SolverConfig cfg) {
  if (!cfg.max_step) cfg.max_step = exc.period() / 2.0;
  return cfg;
}

IntegrationResult solve_reference(const LinearCircuit& circuit, const PwmExcitation& exc,
                                  double t0, double t1, const SolverConfig& cfg_in) {
  circuit.validate();
  if (!(t1 > t0)) throw std::invalid_argument("reference span must have positive length");
  const SolverConfig cfg = reference_defaults(exc, cfg_in);
  cfg.validate();

  std::vector<double> breaks = find_switch_times(exc, t0, t1).merged();
  breaks.insert(breaks.begin(), t0);
  breaks.push_back(t1);

  IntegrationResult out{Trajectory(circuit.states(), cfg.dense_output), SolverStats{}};
  out.trajectory.push_initial(t0, circuit.x0);
  Eigen::VectorXd x = circuit.x0;

  DescriptorSystem sys;
  sys.dim = circuit.states();
  sys.mass = [&](double, Eigen::MatrixXd& m) { m = circuit.A; };
  sys.stiffness = [&](double, Eigen::MatrixXd& n) { n = circuit.B; };
  sys.constant_mass = true;
  sys.constant_stiffness = true;

  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double a = breaks[s], b = breaks[s + 1];
    if (!(b > a)) continue;
    // The input is constant on (a, b); take its polarity from the midpoint.
    const Eigen::VectorXd c = exc.value(0.5 * (a + b)) * circuit.pwm_coupling;
    sys.forcing = [&c](double, Eigen::VectorXd& f) { f = c; };
    integrate_append(sys, a, b, x, cfg, out.trajectory, out.stats);
    x = out.trajectory.state(out.trajectory.size() - 1);
  }
  return out;
}

SolverConfig oracle_config(const PwmExcitation& exc) {
  SolverConfig cfg;
  cfg.abstol = 1e-12;
  cfg.reltol = 1e-12;
  cfg.max_order = 2;
  cfg.max_step = exc.period() / 1000.0;
  cfg.dense_output = false;
  return cfg;
}

Trajectory make_reference_oracle(const LinearCircuit& circuit, const PwmExcitation& exc,
                                 double t0, double t1) {
  return solve_reference(circuit, exc, t0, t1, oracle_config(exc)).trajectory;
}

}  // namespace mpde
