#pragma once

#include "mpde/trajectory.hpp"

#include <vector>

namespace mpde {

/// Midpoints of a uniform grid with `samples_per_cycle` cells per switching
/// period covering [t0, t1].
std::vector<double> midpoint_grid(double t0, double t1, int samples_per_cycle, double Ts);

/// Relative L2 error ||ref - test|| / ||ref|| of one state component,
/// approximated with the midpoint rule on midpoint_grid(). The reference is
/// interpolated linearly; the test trajectory uses its step interpolant when
/// it carries one. Throws std::domain_error on a zero reference norm.
double l2_relative_error(const Trajectory& ref, const Trajectory& test, int component, double t0,
                         double t1, int samples_per_cycle, double Ts);

}  // namespace mpde
