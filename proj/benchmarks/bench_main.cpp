#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dk/kernels.hpp"
#include "dk/noise.hpp"
#include "dk/particles.hpp"
#include "dk/solver.hpp"

using namespace dk;

namespace {

RealField smooth_field(const GridSpec& g) {
  return RealField::from_function(g, [](std::span<const double> x) {
    return 1.0 + 0.4 * std::cos(2 * std::numbers::pi * x[0]) + 0.2 * std::sin(4 * std::numbers::pi * x[1]);
  });
}

void BM_Gradient(benchmark::State& state) {
  const GridSpec g(2, static_cast<int>(state.range(0)));
  const RealField f = smooth_field(g);
  for (auto _ : state) benchmark::DoNotOptimize(gradient(f));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Gradient)->RangeMultiplier(2)->Range(32, 256);

void BM_SolverStep(benchmark::State& state) {
  const GridSpec g(2, static_cast<int>(state.range(0)));
  SolverConfig c;
  c.grid = g;
  c.kernel = KernelSchedule(biot_savart(g));
  const auto ks = uv_wavevectors(2, 4);
  std::vector<double> a(ks.size(), std::sqrt(1.0 / ks.size()));
  c.noise = uv_noise(g, 4, a);
  c.noise_amplitude = 0.3;
  c.dt = 1e-5;
  c.t_end = 1e-5;
  c.initial = smooth_field(g);
  const Solver solver(c);
  const SpdeState s = solver.initial_state();
  const std::vector<double> draws = solver.noise_path().draws(0);
  for (auto _ : state) benchmark::DoNotOptimize(solver.step(s, draws));
}
BENCHMARK(BM_SolverStep)->RangeMultiplier(2)->Range(32, 128)->Unit(benchmark::kMicrosecond);

void BM_ParticleDrift(benchmark::State& state) {
  const GridSpec g(2, 32);
  const KernelSpec v = biot_savart(g, 4);
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ParticleState s;
  s.dim = 2;
  s.positions.resize(2 * static_cast<std::size_t>(state.range(0)));
  for (auto& x : s.positions) x = u(gen);
  for (auto _ : state) benchmark::DoNotOptimize(particle_drift(s, v));
}
BENCHMARK(BM_ParticleDrift)->RangeMultiplier(10)->Range(1000, 100000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
