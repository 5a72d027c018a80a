#include "mpde/mpde.hpp"

#include "mpde/error.hpp"

#include <stdexcept>

namespace mpde {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ReducedSystem::ReducedSystem(LinearCircuit circuit, SplineBasis basis, PwmExcitation excitation,
                             const AffineProbe& probe)
    : circuit_(std::move(circuit)),
      basis_(std::move(basis)),
      excitation_(std::move(excitation)),
      ops_(GalerkinOperators::build(basis_, excitation_.period(), probe)),
      projection_(ops_.pwm_load, circuit_.pwm_coupling) {
  circuit_.validate();
  dim_ = circuit_.states() * basis_.dof_count();
  constant_duty_ = excitation_.duty.kind() == DutyKind::constant;

  const Eigen::MatrixXd& A = circuit_.A;
  const Eigen::MatrixXd& B = circuit_.B;
  mass0_ = kron(A, ops_.mass.constant);
  mass1_ = kron(A, ops_.mass.slope);
  stiff0_ = kron(B, ops_.mass.constant) + kron(A, ops_.transport.constant);
  stiff1_ = kron(B, ops_.mass.slope) + kron(A, ops_.transport.slope);
  drift0_ = kron(A, ops_.duty_drift.constant);
  drift1_ = kron(A, ops_.duty_drift.slope);
}

void ReducedSystem::mass(double t1, Eigen::MatrixXd& out) const {
  const double d = excitation_.duty.value(t1);
  out = mass0_ + d * mass1_;
}

void ReducedSystem::stiffness(double t1, Eigen::MatrixXd& out) const {
  const double d = excitation_.duty.value(t1);
  out = stiff0_ + d * stiff1_;
  const double rate = excitation_.duty.derivative(t1);
  if (rate != 0.0) out += rate * (drift0_ + d * drift1_);
}

void ReducedSystem::forcing(double t1, Eigen::VectorXd& out) const {
  out.resize(dim_);
  const double d = excitation_.duty.value(t1);
  if (excitation_.switching()) {
    projection_.evaluate_into(excitation_.v_peak, d, out);
    return;
  }
  // Permanently on: Ts * int P, i.e. the row sums of I(d).
  const Eigen::VectorXd block = excitation_.v_peak * ops_.mass.at(d).rowwise().sum();
  const Eigen::Index nb = block.size();
  for (Eigen::Index j = 0; j < circuit_.pwm_coupling.size(); ++j) {
    out.segment(j * nb, nb) = circuit_.pwm_coupling[j] * block;
  }
}

Eigen::MatrixXd ReducedSystem::mass(double t1) const {
  Eigen::MatrixXd out;
  mass(t1, out);
  return out;
}

Eigen::MatrixXd ReducedSystem::stiffness(double t1) const {
  Eigen::MatrixXd out;
  stiffness(t1, out);
  return out;
}

Eigen::VectorXd ReducedSystem::forcing(double t1) const {
  Eigen::VectorXd out;
  forcing(t1, out);
  return out;
}

Eigen::MatrixXd ReducedSystem::mass_direct(double t1) const {
  const double d = excitation_.duty.value(t1);
  return kron(circuit_.A, assemble_mass(basis_, d, excitation_.period()));
}

Eigen::MatrixXd ReducedSystem::stiffness_direct(double t1) const {
  const double d = excitation_.duty.value(t1);
  const double Ts = excitation_.period();
  return kron(circuit_.B, assemble_mass(basis_, d, Ts)) +
         kron(circuit_.A, assemble_transport(basis_, d)) +
         excitation_.duty.derivative(t1) * kron(circuit_.A, assemble_duty_drift(basis_, d, Ts));
}

Eigen::VectorXd ReducedSystem::forcing_direct(double t1) const {
  const double d = excitation_.duty.value(t1);
  const double Ts = excitation_.period();
  const Eigen::VectorXd load =
      excitation_.v_peak * (excitation_.switching()
                                ? assemble_pwm_load(basis_, d, Ts)
                                : Eigen::VectorXd(assemble_mass(basis_, d, Ts).rowwise().sum()));
  return kron(circuit_.pwm_coupling, load);
}

DescriptorSystem ReducedSystem::descriptor() const {
  DescriptorSystem sys;
  sys.dim = dim_;
  sys.mass = [this](double t, Eigen::MatrixXd& out) { mass(t, out); };
  sys.stiffness = [this](double t, Eigen::MatrixXd& out) { stiffness(t, out); };
  sys.forcing = [this](double t, Eigen::VectorXd& out) { forcing(t, out); };
  sys.constant_mass = constant_duty_;
  sys.constant_stiffness = constant_duty_;
  return sys;
}

ReducedSystem build_reduced(const LinearCircuit& circuit, const SplineBasis& basis,
                            const PwmExcitation& excitation) {
  return ReducedSystem(circuit, basis, excitation);
}

Eigen::VectorXd steady_state_coefficients(const ReducedSystem& rsys, double t1) {
  const Eigen::MatrixXd B = rsys.stiffness(t1);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
  if (!lu.isInvertible()) {
    throw SolverError("singular_steady_state", "reduced stiffness matrix is singular");
  }
  return lu.solve(rsys.forcing(t1));
}

Eigen::VectorXd steady_state_init(const ReducedSystem& rsys, const Eigen::VectorXd& x0,
                                  double t0) {
  const int ns = rsys.circuit().states();
  const int nb = rsys.basis().dof_count();
  if (x0.size() != ns) throw std::invalid_argument("initial state dimension mismatch");
  Eigen::VectorXd w = steady_state_coefficients(rsys, t0);
  const double tau = rsys.excitation().carrier(t0);
  const Eigen::VectorXd p = rsys.basis().eval(tau, rsys.excitation().duty.value(t0));
  for (int j = 0; j < ns; ++j) {
    auto block = w.segment(j * nb, nb);
    const double shift = p.dot(block) - x0[j];
    block.array() -= shift;
  }
  return w;
}

double MpdeSolution::value(double t, int state) const {
  const double tau = excitation.carrier(t);
  const double d = excitation.duty.value(t);
  const SpanValues sv = basis.eval_span(tau, d);
  const int nb = basis.dof_count();
  double x = 0.0;
  for (int r = 0; r <= basis.degree(); ++r) {
    const int k = basis.dof_of_raw(sv.first + r);
    x += sv.values[r] * envelope.dense_eval(t, state * nb + k);
  }
  return x;
}

Eigen::VectorXd MpdeSolution::value(double t) const {
  Eigen::VectorXd x(states);
  for (int j = 0; j < states; ++j) x[j] = value(t, j);
  return x;
}

MpdeResult solve_mpde(const ReducedSystem& rsys, double t0, double t1, const SolverConfig& cfg,
                      InitMode init) {
  const Eigen::VectorXd& x0 = rsys.circuit().x0;
  Eigen::VectorXd w0;
  if (init == InitMode::steady_shift) {
    w0 = steady_state_init(rsys, x0, t0);
  } else {
    const int nb = rsys.basis().dof_count();
    w0.resize(rsys.dim());
    for (int j = 0; j < rsys.circuit().states(); ++j) w0.segment(j * nb, nb).setConstant(x0[j]);
  }
  SolverConfig envelope_cfg = cfg;
  envelope_cfg.dense_output = true;
  IntegrationResult run = integrate(rsys.descriptor(), t0, t1, w0, envelope_cfg);
  return MpdeResult{
      MpdeSolution{std::move(run.trajectory), rsys.basis(), rsys.excitation(),
                   rsys.circuit().states()},
      run.stats};
}

Trajectory reconstruct(const MpdeSolution& sol, std::span<const double> times) {
  Trajectory out(sol.states, false);
  out.reserve(times.size());
  for (double t : times) out.push_sample(t, sol.value(t));
  return out;
}

}  // namespace mpde
