#pragma once

/**
 * @file circuit.hpp
 * @brief Linear descriptor circuits A x' + B x = c(t) driven by a bipolar,
 *        trailing-edge sawtooth PWM source with a slowly varying duty cycle.
 */

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace mpde {

struct LinearCircuit {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::VectorXd x0;
  /// Column mapping the scalar PWM voltage into the state equations.
  Eigen::VectorXd pwm_coupling;
  std::vector<std::string> labels;

  [[nodiscard]] int states() const noexcept { return static_cast<int>(A.rows()); }
  /// Throws std::invalid_argument on inconsistent dimensions.
  void validate() const;
};

struct BuckParameters {
  double inductance = 4e-3;       // H
  double capacitance = 10e-6;     // F
  double coil_resistance = 10e-3; // Ohm
  double load_resistance = 20.0;  // Ohm
};

/// States (i_L, v_C); A = diag(L, C), B = [[R_L, 1], [-1, 1/R]], x0 = 0.
LinearCircuit buck_circuit(double L, double C, double R_L, double R);
inline LinearCircuit buck_circuit(const BuckParameters& p) {
  return buck_circuit(p.inductance, p.capacitance, p.coil_resistance, p.load_resistance);
}

enum class DutyKind { constant, sinusoidal };

class DutyCycleProfile {
 public:
  static DutyCycleProfile constant(double d);
  /// d(t) = 0.5 * ((v_desired / v_peak) * sin(2 pi f_ac t) + 1).
  static DutyCycleProfile sinusoidal(double v_desired, double v_peak, double f_ac);

  [[nodiscard]] DutyKind kind() const noexcept { return kind_; }
  /// Throws std::domain_error if the value leaves (0,1).
  [[nodiscard]] double value(double t) const;
  [[nodiscard]] double derivative(double t) const;

  [[nodiscard]] double constant_value() const noexcept { return level_; }
  [[nodiscard]] double v_desired() const noexcept { return v_desired_; }
  [[nodiscard]] double v_peak() const noexcept { return v_peak_; }
  [[nodiscard]] double f_ac() const noexcept { return f_ac_; }

 private:
  DutyKind kind_ = DutyKind::constant;
  double level_ = 0.5;
  double v_desired_ = 0.0;
  double v_peak_ = 1.0;
  double f_ac_ = 0.0;
};

class PwmExcitation {
 public:
  PwmExcitation(double v_peak, double fs, DutyCycleProfile duty);

  /// Permanently on-state source (+v_peak, no switching events).
  static PwmExcitation dc(double v_peak, double fs);

  [[nodiscard]] double period() const noexcept { return 1.0 / fs; }
  /// s(t) = t/Ts mod 1.
  [[nodiscard]] double carrier(double t) const;
  /// +v_peak while s(t) <= d(t), -v_peak otherwise.
  [[nodiscard]] double value(double t) const;
  [[nodiscard]] bool switching() const noexcept { return switching_; }

  double v_peak;
  double fs;
  DutyCycleProfile duty;

 private:
  bool switching_ = true;
};

double pwm_value(const PwmExcitation& exc, double t);
double duty_value(const DutyCycleProfile& profile, double t1);
double duty_derivative(const DutyCycleProfile& profile, double t1);

}  // namespace mpde
