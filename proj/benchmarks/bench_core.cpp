#include <benchmark/benchmark.h>

#include "dpcm/config.hpp"
#include "dpcm/experiments.hpp"
#include "dpcm/poisson.hpp"
#include "dpcm/stepper.hpp"

using namespace dpcm;

namespace {

ModelSpec default_spec() {
  return parse_config_text("{}", "<bench>").spec;
}

void BM_PoissonSolve(benchmark::State& bench) {
  const int n = static_cast<int>(bench.range(0));
  const ModelSpec spec = default_spec();
  const Mesh mesh(n);
  Field u0(n);
  for (int k = 0; k < n; ++k) u0[k] = charge_density(2.0, 1.0, spec) + 0.1 * k / n;
  for (auto _ : bench) {
    benchmark::DoNotOptimize(solve_poisson(u0, spec, mesh));
  }
}
BENCHMARK(BM_PoissonSolve)->Arg(100)->Arg(1000);

void BM_NewtonStep(benchmark::State& bench) {
  const int n = static_cast<int>(bench.range(0));
  const ModelSpec spec = default_spec();
  const Mesh mesh(n);
  const SolverConfig cfg;
  const State s0 = initial_state(Field(n, 2.0), Field(n, 1.0), spec, mesh);
  for (auto _ : bench) {
    benchmark::DoNotOptimize(newton_solve(s0, spec, mesh, cfg, cfg.dt));
  }
}
BENCHMARK(BM_NewtonStep)->Arg(100)->Arg(400);

void BM_Advance100Steps(benchmark::State& bench) {
  const ModelSpec spec = default_spec();
  const Mesh mesh(100);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  const State s0 = initial_state(Field(100, 2.0), Field(100, 1.0), spec, mesh);
  for (auto _ : bench) {
    State s = s0;
    benchmark::DoNotOptimize(advance(std::move(s), spec, mesh, cfg, 0.1));
  }
}
BENCHMARK(BM_Advance100Steps);

void BM_TotalCurrent(benchmark::State& bench) {
  const ModelSpec spec = default_spec();
  const Mesh mesh(1000);
  const SchemeConfig schemes;
  const State s = initial_state(Field(1000, 2.0), Field(1000, 1.0), spec, mesh);
  for (auto _ : bench) {
    benchmark::DoNotOptimize(total_current(s, spec, mesh, schemes));
  }
}
BENCHMARK(BM_TotalCurrent);

}  // namespace

BENCHMARK_MAIN();
