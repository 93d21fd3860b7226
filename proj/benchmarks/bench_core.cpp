#include <benchmark/benchmark.h>

#include "biharm/closedform.hpp"
#include "biharm/quartic.hpp"
#include "biharm/radial_ode.hpp"
#include "biharm/spectral.hpp"

using namespace biharm;

static void BM_Q4(benchmark::State& state) {
  double a = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(q4(a, 13));
    a += 1e-9;
  }
}
BENCHMARK(BM_Q4);

static void BM_ScriptQ(benchmark::State& state) {
  const auto form = state.range(0) ? QForm::Factored : QForm::Expanded;
  double p = 30.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(script_q(p, 13, form));
    p += 1e-9;
  }
}
BENCHMARK(BM_ScriptQ)->Arg(0)->Arg(1);

static void BM_PCritical(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(p_critical(n));
}
BENCHMARK(BM_PCritical)->Arg(13)->Arg(20);

static void BM_Roots(benchmark::State& state) {
  const ProblemParams params(13, 30.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(roots_p_polynomial(params));
    benchmark::DoNotOptimize(roots_r_polynomial(params));
  }
}
BENCHMARK(BM_Roots);

// (n, p) encoded as range(0) = n, range(1) = p.
static void BM_Shoot(benchmark::State& state) {
  const ProblemParams params(static_cast<int>(state.range(0)), static_cast<double>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(shoot(1.0, params));
}
BENCHMARK(BM_Shoot)->Args({5, 9})->Args({13, 30})->Args({15, 10})->Unit(benchmark::kMillisecond);

static void BM_BubbleEnergy(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ProblemParams params(n, sobolev_exponent(n));
  const TestFunction zeta(n, CriticalZeta{1.0});
  const RadialPotential v = critical_potential(CriticalSolution(n, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(energy(zeta, v, params));
}
BENCHMARK(BM_BubbleEnergy)->Arg(5)->Arg(7)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
