#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dk/grid.hpp"
#include "dk/kernels.hpp"

namespace dk {

/// N points on the torus, coordinates stored [i * d + a], all in [0, 1).
struct ParticleState {
  int dim = 1;
  std::vector<double> positions;
  double t = 0.0;
  long step = 0;

  std::size_t count() const { return positions.size() / static_cast<std::size_t>(dim); }
  std::span<const double> position(std::size_t i) const { return {positions.data() + i * dim, std::size_t(dim)}; }
};

struct EmpiricalDensity {
  RealField rho;
  double bandwidth = 0.0;
};

/// (1/N) sum_{j != i} V(X_i - X_j) for every i, laid out like the positions.
/// Uses the mode sum of V: for each wavevector k the structure factor
/// sum_j exp(-2 pi i k.X_j) is formed once, so the cost is O(N * modes).
/// The structure factor is accumulated in fixed point, which makes the drift
/// exactly equivariant under permutations of the particles.
std::vector<double> particle_drift(const ParticleState& state, const KernelSpec& v);

/// Standard normal draws for one step, N * d values keyed by (seed, step, particle).
void particle_draws(std::uint64_t seed, long step, std::size_t count, int dim, std::span<double> out);

/// X_i += drift_i dt + sqrt(2 dt) xi_i, wrapped into [0, 1).
ParticleState step_particles(const ParticleState& state, double dt, const KernelSpec& v,
                             std::span<const double> draws);

/// Runs `steps` steps with draws from particle_draws(seed, ...).
ParticleState run_particles(ParticleState state, double dt, long steps, const KernelSpec& v, std::uint64_t seed);

/// Nearest-grid-point histogram normalized to unit mass, then circular
/// convolution with a sampled periodic Gaussian of standard deviation
/// `bandwidth` (unit discrete mass); rounding negatives are clamped to 0.
/// Throws std::invalid_argument when bandwidth < grid spacing.
EmpiricalDensity empirical_density(const ParticleState& state, const GridSpec& grid, double bandwidth);

/// N i.i.d. samples from a density bounded by `bound`, by rejection from the
/// uniform law; uniform draws come from (seed, particle, attempt).
ParticleState sample_particles(std::size_t count, int dim, const std::function<double(std::span<const double>)>& density,
                               double bound, std::uint64_t seed);

/// sqrt(N) (empirical - mean_field), exported per snapshot as raw data.
RealField fluctuation_field(const RealField& empirical, const RealField& mean_field, std::size_t count);

double wrap_unit(double x);

}  // namespace dk
