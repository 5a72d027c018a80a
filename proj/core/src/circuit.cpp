#include "mpde/circuit.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mpde {

void LinearCircuit::validate() const {
  const auto n = A.rows();
  if (A.cols() != n || B.rows() != n || B.cols() != n) {
    throw std::invalid_argument("circuit matrices must be square and of equal size");
  }
  if (x0.size() != n || pwm_coupling.size() != n) {
    throw std::invalid_argument("initial state and PWM coupling must match the state dimension");
  }
}

LinearCircuit buck_circuit(double L, double C, double R_L, double R) {
  if (!(L > 0.0 && C > 0.0 && R_L > 0.0 && R > 0.0)) {
    throw std::invalid_argument("buck converter parameters must be positive");
  }
  LinearCircuit c;
  c.A.resize(2, 2);
  c.A << L, 0.0, 0.0, C;
  c.B.resize(2, 2);
  c.B << R_L, 1.0, -1.0, 1.0 / R;
  c.x0 = Eigen::VectorXd::Zero(2);
  c.pwm_coupling = Eigen::Vector2d(1.0, 0.0);
  c.labels = {"i_L", "v_C"};
  return c;
}

DutyCycleProfile DutyCycleProfile::constant(double d) {
  if (!(d > 0.0 && d < 1.0)) {
    throw std::invalid_argument("constant duty cycle must lie in (0,1), got " + std::to_string(d));
  }
  DutyCycleProfile p;
  p.kind_ = DutyKind::constant;
  p.level_ = d;
  return p;
}

DutyCycleProfile DutyCycleProfile::sinusoidal(double v_desired, double v_peak, double f_ac) {
  if (!(v_peak > 0.0) || !(f_ac > 0.0) || !(v_desired >= 0.0)) {
    throw std::invalid_argument("sinusoidal duty needs v_peak > 0, f_ac > 0, v_desired >= 0");
  }
  if (!(v_desired < v_peak)) {
    throw std::invalid_argument("sinusoidal duty needs v_desired < v_peak to stay inside (0,1)");
  }
  DutyCycleProfile p;
  p.kind_ = DutyKind::sinusoidal;
  p.v_desired_ = v_desired;
  p.v_peak_ = v_peak;
  p.f_ac_ = f_ac;
  return p;
}

double DutyCycleProfile::value(double t) const {
  double d = level_;
  if (kind_ == DutyKind::sinusoidal) {
    d = 0.5 * ((v_desired_ / v_peak_) * std::sin(2.0 * std::numbers::pi * f_ac_ * t) + 1.0);
  }
  if (!(d > 0.0 && d < 1.0)) {
    throw std::domain_error("duty cycle left (0,1) at t=" + std::to_string(t));
  }
  return d;
}

double DutyCycleProfile::derivative(double t) const {
  if (kind_ == DutyKind::constant) return 0.0;
  const double w = 2.0 * std::numbers::pi * f_ac_;
  return 0.5 * (v_desired_ / v_peak_) * w * std::cos(w * t);
}

PwmExcitation::PwmExcitation(double v_peak_, double fs_, DutyCycleProfile duty_)
    : v_peak(v_peak_), fs(fs_), duty(duty_) {
  if (!(fs > 0.0)) throw std::invalid_argument("switching frequency must be positive");
  if (!(v_peak > 0.0)) throw std::invalid_argument("PWM peak voltage must be positive");
}

PwmExcitation PwmExcitation::dc(double v_peak, double fs) {
  PwmExcitation e(v_peak, fs, DutyCycleProfile::constant(0.5));
  e.switching_ = false;
  return e;
}

double PwmExcitation::carrier(double t) const {
  const double x = t * fs;
  return x - std::floor(x);
}

double PwmExcitation::value(double t) const {
  if (!switching_) return v_peak;
  return carrier(t) <= duty.value(t) ? v_peak : -v_peak;
}

double pwm_value(const PwmExcitation& exc, double t) { return exc.value(t); }
double duty_value(const DutyCycleProfile& profile, double t1) { return profile.value(t1); }
double duty_derivative(const DutyCycleProfile& profile, double t1) {
  return profile.derivative(t1);
}

}  // namespace mpde
