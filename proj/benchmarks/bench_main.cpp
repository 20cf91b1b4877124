#include <benchmark/benchmark.h>

#include "crq/amp_solver.hpp"
#include "crq/mc_simulator.hpp"
#include "crq/precoder.hpp"
#include "crq/scalar_core.hpp"
#include "crq/state_evolution.hpp"

namespace {

crq::ModelParams base_params() {
  crq::ModelParams p;
  p.delta = 0.5;
  p.rho = 0.2;
  p.lambda = 0.2;
  return p;
}

crq::Instance draw(int n) {
  crq::SystemConfig c;
  c.n = n;
  c.k = n / 2;
  c.sigma2 = 0.0;
  return crq::generate_instance(c, 1);
}

void BM_KernelsClosedForm(benchmark::State& state) {
  const crq::DenoiserParams p{0.8, 0.4};
  double tau = 1.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(crq::kernels_closed_form(tau, p));
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_KernelsClosedForm);

void BM_SolveFixedPoint(benchmark::State& state) {
  const auto p = base_params();
  for (auto _ : state) benchmark::DoNotOptimize(crq::solve_fixed_point(0.53, p));
}
BENCHMARK(BM_SolveFixedPoint);

void BM_Characterize(benchmark::State& state) {
  const auto p = base_params();
  for (auto _ : state) benchmark::DoNotOptimize(crq::characterize(p));
}
BENCHMARK(BM_Characterize)->Unit(benchmark::kMillisecond);

void BM_SolveInner(benchmark::State& state) {
  const auto inst = draw(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(crq::solve_inner(inst.H, inst.s, 0.53, 0.2));
}
BENCHMARK(BM_SolveInner)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_AmpRun(benchmark::State& state) {
  const auto inst = draw(static_cast<int>(state.range(0)));
  const auto p = base_params();
  const double a = crq::minimize_risk(p);
  const auto fp = crq::solve_fixed_point(a, p);
  crq::AmpOptions opts;
  opts.onsager = crq::OnsagerMode::StateEvolution;
  for (auto _ : state) benchmark::DoNotOptimize(crq::amp_run(inst.H, inst.s, a, fp, opts));
}
BENCHMARK(BM_AmpRun)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_SolveCrq(benchmark::State& state) {
  const auto inst = draw(static_cast<int>(state.range(0)));
  const auto p = base_params();
  for (auto _ : state) benchmark::DoNotOptimize(crq::solve_crq(inst.H, inst.s, p));
}
BENCHMARK(BM_SolveCrq)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
