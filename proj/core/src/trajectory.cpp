#include "mpde/trajectory.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mpde {

void Trajectory::push_initial(double t, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (!times_.empty()) throw std::logic_error("trajectory already has an initial point");
  if (x.size() != dim_) throw std::invalid_argument("state dimension mismatch");
  times_.push_back(t);
  states_.insert(states_.end(), x.data(), x.data() + dim_);
  if (dense_) {
    back1_.insert(back1_.end(), dim_, 0.0);
    back2_.insert(back2_.end(), dim_, 0.0);
    order_.push_back(0);
  }
}

void Trajectory::push_step(double t, const Eigen::Ref<const Eigen::VectorXd>& x, int order,
                           const Eigen::Ref<const Eigen::VectorXd>& back1,
                           const Eigen::Ref<const Eigen::VectorXd>& back2) {
  if (!dense_) {
    push_sample(t, x);
    return;
  }
  if (times_.empty() || !(t > times_.back())) {
    throw std::logic_error("trajectory times must be strictly increasing");
  }
  times_.push_back(t);
  states_.insert(states_.end(), x.data(), x.data() + dim_);
  back1_.insert(back1_.end(), back1.data(), back1.data() + dim_);
  if (order >= 2) {
    back2_.insert(back2_.end(), back2.data(), back2.data() + dim_);
  } else {
    back2_.insert(back2_.end(), dim_, 0.0);
  }
  order_.push_back(static_cast<std::int8_t>(order));
}

void Trajectory::push_sample(double t, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (times_.empty()) {
    push_initial(t, x);
    return;
  }
  if (!(t > times_.back())) throw std::logic_error("trajectory times must be strictly increasing");
  if (x.size() != dim_) throw std::invalid_argument("state dimension mismatch");
  if (dense_) {
    // Linear segment expressed as an order-1 step.
    const Eigen::VectorXd diff = x - state(times_.size() - 1);
    times_.push_back(t);
    states_.insert(states_.end(), x.data(), x.data() + dim_);
    back1_.insert(back1_.end(), diff.data(), diff.data() + dim_);
    back2_.insert(back2_.end(), dim_, 0.0);
    order_.push_back(1);
    return;
  }
  times_.push_back(t);
  states_.insert(states_.end(), x.data(), x.data() + dim_);
}

void Trajectory::reserve(std::size_t samples) {
  times_.reserve(samples);
  states_.reserve(samples * dim_);
  if (dense_) {
    back1_.reserve(samples * dim_);
    back2_.reserve(samples * dim_);
    order_.reserve(samples);
  }
}

std::vector<double> Trajectory::component(int j) const {
  std::vector<double> out(times_.size());
  for (std::size_t i = 0; i < times_.size(); ++i) out[i] = states_[i * dim_ + j];
  return out;
}

std::size_t Trajectory::locate(double t) const {
  if (times_.empty() || t < times_.front() || t > times_.back()) {
    throw std::out_of_range("time " + std::to_string(t) + " outside trajectory span");
  }
  if (times_.size() == 1) return 0;
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  auto i = static_cast<std::size_t>(it - times_.begin());
  return std::max<std::size_t>(i, 1);
}

Eigen::VectorXd Trajectory::linear_eval(double t) const {
  const std::size_t i = locate(t);
  if (i == 0) return state(0);
  const double t0 = times_[i - 1], t1 = times_[i];
  const double w = (t - t0) / (t1 - t0);
  return (1.0 - w) * state(i - 1) + w * state(i);
}

double Trajectory::linear_eval(double t, int component) const {
  const std::size_t i = locate(t);
  if (i == 0) return states_[component];
  const double t0 = times_[i - 1], t1 = times_[i];
  const double w = (t - t0) / (t1 - t0);
  return (1.0 - w) * states_[(i - 1) * dim_ + component] + w * states_[i * dim_ + component];
}

Eigen::VectorXd Trajectory::dense_eval(double t) const {
  if (!dense_) return linear_eval(t);
  const std::size_t i = locate(t);
  if (i == 0 || t == times_[i - 1]) return state(i == 0 ? 0 : i - 1);
  const double s = (t - times_[i]) / (times_[i] - times_[i - 1]);
  Eigen::Map<const Eigen::VectorXd> d1(back1_.data() + i * dim_, dim_);
  Eigen::Map<const Eigen::VectorXd> d2(back2_.data() + i * dim_, dim_);
  return state(i) + s * d1 + (0.5 * s * (s + 1.0)) * d2;
}

double Trajectory::dense_eval(double t, int component) const {
  if (!dense_) return linear_eval(t, component);
  const std::size_t i = locate(t);
  if (i == 0) return states_[component];
  if (t == times_[i - 1]) return states_[(i - 1) * dim_ + component];
  const double s = (t - times_[i]) / (times_[i] - times_[i - 1]);
  const std::size_t k = i * dim_ + component;
  return states_[k] + s * back1_[k] + 0.5 * s * (s + 1.0) * back2_[k];
}

}  // namespace mpde
