#include <vector>

#include "benchmark/benchmark.h"
#include "hpa/calibration.hpp"
#include "hpa/integrator.hpp"
#include "hpa/model.hpp"
#include "hpa/sensitivity.hpp"

namespace {

void BM_Rhs(benchmark::State& state) {
  const hpa::ParameterSet p;
  hpa::HormoneState s{9.0, 18.0, 7.0};
  double t = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hpa::rhs(t, s, p));
    t += 0.5;
  }
}
BENCHMARK(BM_Rhs);

void BM_IntegrateFixed(benchmark::State& state) {
  const hpa::ParameterSet p;
  hpa::IntegrationConfig cfg;
  cfg.dt = 0.5;
  cfg.burn_in = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hpa::integrate(cfg, p));
}
BENCHMARK(BM_IntegrateFixed)->Arg(0)->Arg(14400)->Unit(benchmark::kMillisecond);

void BM_IntegrateAdaptive(benchmark::State& state) {
  const hpa::ParameterSet p;
  hpa::IntegrationConfig cfg = hpa::FitProblem::default_integration();
  for (auto _ : state) benchmark::DoNotOptimize(hpa::integrate(cfg, p));
}
BENCHMARK(BM_IntegrateAdaptive)->Unit(benchmark::kMillisecond);

// One calibration objective evaluation against 30-min data.
void BM_Objective(benchmark::State& state) {
  const hpa::ParameterSet p;
  hpa::FitProblem prob = hpa::FitProblem::around(p, {"k1", "k2", "k3", "k4", "k5"});
  const auto obs = hpa::synthesize_observations(p, prob.integration, 30.0, 0.0, 1);
  const auto x = prob.initial_values();
  for (auto _ : state) benchmark::DoNotOptimize(hpa::objective(x, prob, obs));
}
BENCHMARK(BM_Objective)->Unit(benchmark::kMillisecond);

void BM_SiTimeseries(benchmark::State& state) {
  const hpa::ParameterSet p;
  const auto grid = hpa::default_sensitivity_grid();
  for (auto _ : state) benchmark::DoNotOptimize(hpa::si_timeseries(p, "k5", grid, 1e-3));
}
BENCHMARK(BM_SiTimeseries)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
