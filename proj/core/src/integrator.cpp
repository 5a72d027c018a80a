#include "mpde/integrator.hpp"

#include "mpde/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mpde {

void SolverConfig::validate() const {
  if (!(abstol > 0.0) || !(reltol > 0.0)) {
    throw std::invalid_argument("abstol and reltol must be positive");
  }
  if (max_order < 1 || max_order > 2) throw std::invalid_argument("max_order must be 1 or 2");
  if (max_step && !(*max_step > 0.0)) throw std::invalid_argument("max_step must be positive");
  if (initial_step && !(*initial_step > 0.0)) {
    throw std::invalid_argument("initial_step must be positive");
  }
  if (fixed_step && !(*fixed_step > 0.0)) throw std::invalid_argument("fixed_step must be positive");
}

SolverStats& SolverStats::operator+=(const SolverStats& o) {
  accepted_steps += o.accepted_steps;
  failed_steps += o.failed_steps;
  lu_factorizations += o.lu_factorizations;
  function_evaluations += o.function_evaluations;
  linear_solves += o.linear_solves;
  starts += o.starts;
  return *this;
}

DescriptorSystem DescriptorSystem::constant(Eigen::MatrixXd M, Eigen::MatrixXd N, Eigen::VectorXd f) {
  DescriptorSystem sys;
  sys.dim = static_cast<int>(M.rows());
  sys.mass = [M = std::move(M)](double, Eigen::MatrixXd& out) { out = M; };
  sys.stiffness = [N = std::move(N)](double, Eigen::MatrixXd& out) { out = N; };
  sys.forcing = [f = std::move(f)](double, Eigen::VectorXd& out) { out = f; };
  sys.constant_mass = true;
  sys.constant_stiffness = true;
  return sys;
}

namespace {

// G_k = sum_{j=1..k} 1/j.
constexpr double kG[] = {1.0, 1.5};
constexpr double kGrowthMax = 5.0;
constexpr double kShrinkMin = 0.2;
constexpr double kSafety = 0.9;
// Successful steps only change h when the proposal exceeds this ratio,
// which lets constant-matrix systems keep their factorization.
constexpr double kHysteresis = 1.1;

class BdfRun {
 public:
  BdfRun(const DescriptorSystem& sys, double t0, double t1, const Eigen::VectorXd& x0,
         const SolverConfig& cfg, Trajectory& traj, SolverStats& stats)
      : sys_(sys), cfg_(cfg), traj_(traj), stats_(stats), t_(t0), t_end_(t1), y_(x0) {
    n_ = sys.dim;
    span_ = t1 - t0;
    max_order_ = cfg.max_order;
    h_max_ = std::min(cfg.max_step.value_or(span_), span_);
    h_min_ = 1e-14 * span_;
    dif_ = Eigen::MatrixXd::Zero(n_, max_order_ + 2);
    M_.resize(n_, n_);
    N_.resize(n_, n_);
    f_.resize(n_);
  }

  void run() {
    ++stats_.starts;
    evaluate(t_, true);
    // Initial slope from M y' = f - N y.
    Eigen::PartialPivLU<Eigen::MatrixXd> mlu(M_);
    ++stats_.lu_factorizations;
    check_factor(mlu, "mass matrix");
    const Eigen::VectorXd yp0 = mlu.solve(f_ - N_ * y_);
    ++stats_.linear_solves;

    if (cfg_.fixed_step) {
      h_ = *cfg_.fixed_step;
    } else {
      h_ = cfg_.initial_step.value_or(std::min(h_max_, span_ * 1e-4));
    }
    h_ = std::min(h_, span_);
    k_ = 1;
    dif_.col(0) = h_ * yp0;

    Eigen::VectorXd y0(n_), psi(n_), rhs(n_), ynew(n_), difkp1(n_), wt(n_);
    int consecutive_failures = 0;
    int steps_at_h = 0;
    bool done = false;

    while (!done) {
      // Land exactly on t_end.
      const double remaining = t_end_ - t_;
      const bool final_step = cfg_.fixed_step ? (h_ >= remaining * (1.0 - 1e-12))
                                              : (kHysteresis * h_ >= remaining);
      if (final_step && h_ != remaining) {
        rescale(remaining);
      }
      const double t_new = final_step ? t_end_ : t_ + h_;

      y0 = y_;
      psi.setZero();
      for (int j = 0; j < k_; ++j) {
        y0 += dif_.col(j);
        psi += kG[j] * dif_.col(j);
      }
      psi /= kG[k_ - 1];
      const double hg = h_ / kG[k_ - 1];

      evaluate(t_new, false);
      const bool time_varying = !(sys_.constant_mass && sys_.constant_stiffness);
      if (time_varying || !factored_ || hg != factored_hg_) {
        lu_.compute(M_ + hg * N_);
        ++stats_.lu_factorizations;
        check_factor(lu_, "step matrix");
        factored_ = true;
        factored_hg_ = hg;
      }
      rhs.noalias() = hg * f_;
      rhs.noalias() += M_ * (y0 - psi);
      ynew = lu_.solve(rhs);
      ++stats_.linear_solves;
      difkp1 = ynew - y0;

      for (int i = 0; i < n_; ++i) {
        wt[i] = cfg_.abstol + cfg_.reltol * std::max(std::abs(y_[i]), std::abs(ynew[i]));
      }
      const double err = rms(difkp1, wt) / (k_ + 1);

      if (!cfg_.fixed_step && !(err <= 1.0)) {
        ++stats_.failed_steps;
        ++consecutive_failures;
        double factor = std::max(kShrinkMin, kSafety * std::pow(err, -1.0 / (k_ + 1)));
        if (consecutive_failures >= 2) factor = std::min(factor, 0.5);
        if (consecutive_failures >= 3 && k_ > 1) k_ = 1;
        const double h_new = h_ * factor;
        if (h_new < h_min_) {
          std::ostringstream msg;
          msg << "step size underflow at t=" << t_ << " (h=" << h_new << ")";
          throw SolverError("step_size_underflow", msg.str());
        }
        rescale(h_new);
        steps_at_h = 0;
        continue;
      }

      ++stats_.accepted_steps;
      consecutive_failures = 0;

      const double errkm1 =
          k_ > 1 ? rms(dif_.col(k_ - 1) + difkp1, wt) / k_ : std::numeric_limits<double>::infinity();
      dif_.col(k_ + 1) = difkp1 - dif_.col(k_);
      dif_.col(k_) = difkp1;
      for (int j = k_ - 1; j >= 0; --j) dif_.col(j) += dif_.col(j + 1);
      const double errkp1 = k_ < max_order_ ? rms(dif_.col(k_ + 1), wt) / (k_ + 2)
                                            : std::numeric_limits<double>::infinity();

      t_ = t_new;
      y_ = ynew;
      traj_.push_step(t_, y_, k_, dif_.col(0), dif_.col(1));
      ++steps_at_h;
      if (final_step) {
        done = true;
        continue;
      }

      if (cfg_.fixed_step) {
        if (k_ < max_order_) k_ = k_ + 1;
        continue;
      }

      double h_best = h_ * grow(err, k_ + 1, kSafety);
      int k_best = k_;
      if (steps_at_h >= k_ + 1) {
        if (k_ > 1) {
          const double h_down = h_ * grow(errkm1, k_, 1.0 / 1.3);
          if (h_down > h_best) h_best = h_down, k_best = k_ - 1;
        }
        if (k_ < max_order_) {
          const double h_up = h_ * grow(errkp1, k_ + 2, 1.0 / 1.4);
          if (h_up > h_best) h_best = h_up, k_best = k_ + 1;
        }
      }
      h_best = std::min(h_best, h_max_);
      if (h_best > kHysteresis * h_) {
        k_ = k_best;
        rescale(h_best);
        steps_at_h = 0;
      }
    }
  }

 private:
  static double rms(const Eigen::VectorXd& v, const Eigen::VectorXd& wt) {
    return std::sqrt((v.array() / wt.array()).square().mean());
  }

  // Growth factor safety * err^(-1/exponent), capped at kGrowthMax.
  static double grow(double err, int exponent, double safety) {
    if (!(err > 0.0)) return kGrowthMax;
    return std::min(kGrowthMax, safety * std::pow(err, -1.0 / exponent));
  }

  void evaluate(double t, bool first) {
    if (first || !sys_.constant_mass) sys_.mass(t, M_);
    if (first || !sys_.constant_stiffness) sys_.stiffness(t, N_);
    sys_.forcing(t, f_);
    ++stats_.function_evaluations;
  }

  void check_factor(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu, const char* what) const {
    const auto& u = lu.matrixLU();
    const double umax = u.diagonal().cwiseAbs().maxCoeff();
    const double umin = u.diagonal().cwiseAbs().minCoeff();
    if (!(umax > 0.0) || !(umin > umax * std::numeric_limits<double>::epsilon())) {
      std::ostringstream msg;
      msg << "singular " << what << " at t=" << t_;
      throw SolverError("singular_step_matrix", msg.str());
    }
  }

  // Re-interpolates the backward differences of the current order onto the
  // new step size. For order 2 with ratio r:
  //   D1' = r D1 + r (1 - r) / 2 D2,   D2' = r^2 D2.
  void rescale(double h_new) {
    const double r = h_new / h_;
    if (k_ >= 2) {
      dif_.col(0) = r * dif_.col(0) + (0.5 * r * (1.0 - r)) * dif_.col(1);
      dif_.col(1) *= r * r;
    } else {
      dif_.col(0) *= r;
    }
    h_ = h_new;
  }

  const DescriptorSystem& sys_;
  const SolverConfig& cfg_;
  Trajectory& traj_;
  SolverStats& stats_;

  int n_ = 0;
  int k_ = 1;
  int max_order_ = 2;
  double t_;
  double t_end_;
  double span_ = 0.0;
  double h_ = 0.0;
  double h_max_ = 0.0;
  double h_min_ = 0.0;
  Eigen::VectorXd y_;
  Eigen::MatrixXd dif_;
  Eigen::MatrixXd M_, N_;
  Eigen::VectorXd f_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  bool factored_ = false;
  double factored_hg_ = 0.0;
};

}  // namespace

void integrate_append(const DescriptorSystem& sys, double t0, double t1, const Eigen::VectorXd& x0,
                      const SolverConfig& cfg, Trajectory& traj, SolverStats& stats) {
  cfg.validate();
  if (!(t1 > t0)) throw std::invalid_argument("integration span must have positive length");
  if (x0.size() != sys.dim) throw std::invalid_argument("initial state dimension mismatch");
  if (traj.empty() || traj.end_time() != t0) {
    throw std::invalid_argument("trajectory must end at the integration start");
  }
  BdfRun run(sys, t0, t1, x0, cfg, traj, stats);
  run.run();
}

IntegrationResult integrate(const DescriptorSystem& sys, double t0, double t1,
                            const Eigen::VectorXd& x0, const SolverConfig& cfg) {
  IntegrationResult out{Trajectory(sys.dim, cfg.dense_output), SolverStats{}};
  out.trajectory.push_initial(t0, x0);
  integrate_append(sys, t0, t1, x0, cfg, out.trajectory, out.stats);
  return out;
}

}  // namespace mpde
