#include "mpde/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace mpde {

std::vector<double> midpoint_grid(double t0, double t1, int samples_per_cycle, double Ts) {
  if (samples_per_cycle < 1) throw std::invalid_argument("samples_per_cycle must be >= 1");
  if (!(t1 > t0)) throw std::invalid_argument("error interval must have positive length");
  const double dt = Ts / samples_per_cycle;
  const auto n = static_cast<std::size_t>(std::llround((t1 - t0) / dt));
  const double h = (t1 - t0) / static_cast<double>(std::max<std::size_t>(n, 1));
  std::vector<double> out(std::max<std::size_t>(n, 1));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = t0 + (static_cast<double>(i) + 0.5) * h;
  return out;
}

double l2_relative_error(const Trajectory& ref, const Trajectory& test, int component, double t0,
                         double t1, int samples_per_cycle, double Ts) {
  double num = 0.0, den = 0.0;
  for (double t : midpoint_grid(t0, t1, samples_per_cycle, Ts)) {
    const double r = ref.linear_eval(t, component);
    const double x = test.dense_eval(t, component);
    num += (r - x) * (r - x);
    den += r * r;
  }
  if (!(den > 0.0)) throw std::domain_error("reference has zero L2 norm");
  return std::sqrt(num / den);
}

}  // namespace mpde
