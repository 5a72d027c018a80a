#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace mpde {

/// Time series of states with optional per-step BDF interpolation data.
///
/// States are stored row-major (one contiguous block of dim() values per
/// sample). When dense output is enabled, every accepted step also stores
/// the first and second backward differences at its end point, so the step
/// polynomial y(t_i + s h) = y_i + s D1 + s (s+1)/2 D2, s in [-1, 0], can be
/// evaluated later.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(int dim, bool dense = true) : dim_(dim), dense_(dense) {}

  void push_initial(double t, const Eigen::Ref<const Eigen::VectorXd>& x);
  /// Appends an accepted BDF step. `back2` is ignored for order-1 steps.
  void push_step(double t, const Eigen::Ref<const Eigen::VectorXd>& x, int order,
                 const Eigen::Ref<const Eigen::VectorXd>& back1,
                 const Eigen::Ref<const Eigen::VectorXd>& back2);
  /// Appends a plain sample; the preceding interval is treated as linear.
  void push_sample(double t, const Eigen::Ref<const Eigen::VectorXd>& x);
  void reserve(std::size_t samples);

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
  [[nodiscard]] bool empty() const noexcept { return times_.empty(); }
  [[nodiscard]] bool has_dense() const noexcept { return dense_; }
  [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
  [[nodiscard]] double time(std::size_t i) const { return times_[i]; }
  [[nodiscard]] double start_time() const { return times_.front(); }
  [[nodiscard]] double end_time() const { return times_.back(); }
  [[nodiscard]] Eigen::Map<const Eigen::VectorXd> state(std::size_t i) const {
    return {states_.data() + i * dim_, dim_};
  }
  [[nodiscard]] std::vector<double> component(int j) const;

  /// Step interpolant when dense data exists, linear interpolation otherwise.
  /// Throws std::out_of_range outside [start_time(), end_time()].
  [[nodiscard]] Eigen::VectorXd dense_eval(double t) const;
  [[nodiscard]] Eigen::VectorXd linear_eval(double t) const;
  [[nodiscard]] double linear_eval(double t, int component) const;
  [[nodiscard]] double dense_eval(double t, int component) const;

 private:
  // Index i >= 1 with times_[i-1] <= t <= times_[i].
  [[nodiscard]] std::size_t locate(double t) const;

  int dim_ = 0;
  bool dense_ = false;
  std::vector<double> times_;
  std::vector<double> states_;
  std::vector<double> back1_;
  std::vector<double> back2_;
  std::vector<std::int8_t> order_;
};

}  // namespace mpde
