#include "mpde/experiment.hpp"
#include "mpde/reference.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_MpdeInverter(benchmark::State& state) {
  const auto cfg = mpde::study_config(static_cast<int>(state.range(0)));
  long steps = 0;
  for (auto _ : state) steps = mpde::run_mpde(cfg, nullptr).stats.accepted_steps;
  state.counters["steps"] = static_cast<double>(steps);
}
BENCHMARK(BM_MpdeInverter)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_ReferenceInverter(benchmark::State& state) {
  const auto cfg = mpde::study_config(static_cast<int>(state.range(0)));
  long steps = 0;
  for (auto _ : state) steps = mpde::run_reference(cfg, nullptr).stats.accepted_steps;
  state.counters["steps"] = static_cast<double>(steps);
}
BENCHMARK(BM_ReferenceInverter)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_SwitchTimes(benchmark::State& state) {
  const mpde::PwmExcitation exc(350.0, 5000.0,
                                mpde::DutyCycleProfile::sinusoidal(325.0, 350.0, 50.0));
  for (auto _ : state) benchmark::DoNotOptimize(mpde::find_switch_times(exc, 0.0, 0.08));
}
BENCHMARK(BM_SwitchTimes)->Unit(benchmark::kMicrosecond);

}  // namespace
