#include <benchmark/benchmark.h>

#include "lrmip/bounds.hpp"
#include "lrmip/observables.hpp"
#include "lrmip/trajectory.hpp"

using namespace lrmip;

namespace {

GaussianState scrambled_state(int L) {
  const LatticeSpec spec = LatticeSpec::make(L, 1.5);
  return evolve_unitary(neel_state(spec), build_hopping_matrix(spec), 3.7);
}

void BM_EvolveUnitary(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const LatticeSpec spec = LatticeSpec::make(L, 1.5);
  const SingleParticleHamiltonian h = build_hopping_matrix(spec);
  const GaussianState s = neel_state(spec);
  for (auto _ : state) benchmark::DoNotOptimize(evolve_unitary(s, h, 0.1));
}
BENCHMARK(BM_EvolveUnitary)->Arg(32)->Arg(64)->Arg(128);

void BM_MeasureEigendecomposition(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const GaussianState s = scrambled_state(L);
  for (auto _ : state) benchmark::DoNotOptimize(apply_measurement(s, L / 3));
}
BENCHMARK(BM_MeasureEigendecomposition)->Arg(32)->Arg(64)->Arg(128);

void BM_MeasureHouseholder(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const GaussianState s = scrambled_state(L);
  for (auto _ : state) benchmark::DoNotOptimize(apply_measurement_householder(s, L / 3));
}
BENCHMARK(BM_MeasureHouseholder)->Arg(32)->Arg(64)->Arg(128);

void BM_EntanglementProfile(benchmark::State& state) {
  const GaussianState s = scrambled_state(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(entanglement_profile(s));
}
BENCHMARK(BM_EntanglementProfile)->Arg(32)->Arg(64)->Arg(128);

void BM_Trajectory(benchmark::State& state) {
  TrajectoryConfig c;
  c.spec = LatticeSpec::make(static_cast<int>(state.range(0)), 10.0);
  c.gamma = 0.5;
  c.seed = 1;
  c.update = MeasurementUpdate::householder;
  c.observables = {false, true, true, false};
  const SingleParticleHamiltonian h = build_hopping_matrix(c.spec);
  std::uint64_t id = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_trajectory(c, h, id++));
}
BENCHMARK(BM_Trajectory)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BilinearNorm(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const BoundaryBlock b = build_boundary_block(LatticeSpec::make(L, 1.2), L / 2);
  for (auto _ : state) benchmark::DoNotOptimize(bilinear_norm(b));
}
BENCHMARK(BM_BilinearNorm)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
