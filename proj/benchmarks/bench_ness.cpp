#include <benchmark/benchmark.h>

#include <random>

#include "ness/blas_guard.hpp"
#include "ness/gaussian_lindblad.hpp"
#include "ness/lyapunov.hpp"
#include "ness/observables.hpp"

using namespace ness;

namespace {

DynamicalSystem dynamics(int L) {
  ModelSpec s;
  s.L = L;
  return assemble_dynamics(rotating_frame_lindbladian(s));
}

void BM_Lyapunov(benchmark::State& state, LyapunovMethod method) {
  const DynamicalSystem dyn = dynamics(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_continuous_lyapunov(dyn.drift, dyn.source, method));
  state.counters["n"] = static_cast<double>(dyn.drift.rows());
}

void BM_SteadyState(benchmark::State& state) {
  const DynamicalSystem dyn = dynamics(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(steady_state(dyn));
}

void BM_RealSchur(benchmark::State& state) {
  const DynamicalSystem dyn = dynamics(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(real_schur(dyn.drift));
}

void BM_LabCorrelations(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const BasisLayout layout(L);
  const SteadyState ss = steady_state(dynamics(L));
  for (auto _ : state) {
    const LabCorrelations lab = rotating_to_lab(ss.covariance, layout);
    benchmark::DoNotOptimize(chi_index(lab));
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_Lyapunov, kronecker, LyapunovMethod::Kronecker)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Lyapunov, bartels_stewart, LyapunovMethod::BartelsStewart)
    ->RangeMultiplier(2)
    ->Range(2, 128)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RealSchur)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SteadyState)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LabCorrelations)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  ensure_blas_kernel(argv);
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
