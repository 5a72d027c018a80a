#include "mpde/basis.hpp"
#include "mpde/circuit.hpp"
#include "mpde/galerkin.hpp"
#include "mpde/mpde.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_BasisEval(benchmark::State& state) {
  const auto basis = mpde::SplineBasis::uniform(static_cast<int>(state.range(0)),
                                                static_cast<int>(state.range(1)), 0.5);
  double tau = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(basis.eval(tau, 0.43));
    tau += 0.6180339887;
    if (tau >= 1.0) tau -= 1.0;
  }
}
BENCHMARK(BM_BasisEval)->Args({1, 1})->Args({2, 1})->Args({3, 3});

void BM_AssembleAll(benchmark::State& state) {
  const auto basis = mpde::SplineBasis::uniform(static_cast<int>(state.range(0)),
                                                static_cast<int>(state.range(1)), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(mpde::GalerkinOperators::build(basis, 2e-4));
}
BENCHMARK(BM_AssembleAll)->Args({1, 1})->Args({2, 1})->Args({3, 3});

// Per-step operator evaluation: affine form against fresh quadrature.
void BM_StiffnessAffine(benchmark::State& state) {
  const mpde::ReducedSystem rs(mpde::buck_circuit(mpde::BuckParameters{}),
                               mpde::SplineBasis::uniform(3, 3, 0.5),
                               {350.0, 5000.0, mpde::DutyCycleProfile::sinusoidal(325, 350, 50)});
  Eigen::MatrixXd out;
  double t = 0.0;
  for (auto _ : state) {
    rs.stiffness(t, out);
    benchmark::DoNotOptimize(out.data());
    t += 1e-5;
  }
}
BENCHMARK(BM_StiffnessAffine);

void BM_StiffnessQuadrature(benchmark::State& state) {
  const mpde::ReducedSystem rs(mpde::buck_circuit(mpde::BuckParameters{}),
                               mpde::SplineBasis::uniform(3, 3, 0.5),
                               {350.0, 5000.0, mpde::DutyCycleProfile::sinusoidal(325, 350, 50)});
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rs.stiffness_direct(t));
    t += 1e-5;
  }
}
BENCHMARK(BM_StiffnessQuadrature);

}  // namespace
