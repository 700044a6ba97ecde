#include "dk/particles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dk/rng.hpp"

namespace dk {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Mode {
  std::array<int, 3> k;
  std::array<Complex, 3> coeff;
};

std::vector<Mode> nonzero_modes(const KernelSpec& v) {
  std::vector<Mode> out;
  const GridSpec& grid = v.grid;
  for (std::size_t f = 0; f < grid.size(); ++f) {
    Mode m{grid.wavevector(f), {}};
    bool any = false;
    for (int a = 0; a < grid.dim(); ++a) {
      m.coeff[a] = v.components[a][f];
      any = any || m.coeff[a] != Complex(0.0, 0.0);
    }
    if (any) out.push_back(m);
  }
  return out;
}

// Order-independent accumulator: each term is rounded to a multiple of 2^-62
// and summed exactly, so permuting the particles leaves the sum bit-identical.
__extension__ using Int128 = __int128;
constexpr double kFixedScale = 4611686018427387904.0;  // 2^62

struct FixedSum {
  Int128 re = 0;
  Int128 im = 0;
  void add(Complex z) {
    re += static_cast<Int128>(std::llround(z.real() * kFixedScale));
    im += static_cast<Int128>(std::llround(z.imag() * kFixedScale));
  }
  Complex value() const { return {static_cast<double>(re) / kFixedScale, static_cast<double>(im) / kFixedScale}; }
};

// exp(2 pi i k.x) with the phase reduced modulo 1 first.
Complex unit_phase(const std::array<int, 3>& k, std::span<const double> x) {
  double phase = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) phase += k[a] * x[a];
  phase -= std::floor(phase);
  return std::polar(1.0, kTwoPi * phase);
}

}  // namespace

double wrap_unit(double x) {
  double y = x - std::floor(x);
  if (y >= 1.0) y = 0.0;
  return y;
}

std::vector<double> particle_drift(const ParticleState& state, const KernelSpec& v) {
  const int d = state.dim;
  if (v.dim() != d) throw std::invalid_argument("particle_drift: kernel and particle dimensions differ");
  const std::size_t N = state.count();
  std::vector<double> drift(N * d, 0.0);
  if (N <= 1) return drift;

  for (const Mode& m : nonzero_modes(v)) {
    std::vector<Complex> phases(N);
    FixedSum sum;
    for (std::size_t i = 0; i < N; ++i) {
      phases[i] = unit_phase(m.k, state.position(i));
      sum.add(std::conj(phases[i]));
    }
    const Complex structure = sum.value();
    for (std::size_t i = 0; i < N; ++i) {
      // Drop the j = i term, which contributes exactly one unit of phase.
      const Complex pair_sum = phases[i] * structure - Complex(1.0, 0.0);
      for (int a = 0; a < d; ++a) drift[i * d + a] += (m.coeff[a] * pair_sum).real();
    }
  }
  const double inv_n = 1.0 / static_cast<double>(N);
  for (auto& x : drift) x *= inv_n;
  return drift;
}

void particle_draws(std::uint64_t seed, long step, std::size_t count, int dim, std::span<double> out) {
  if (out.size() != count * static_cast<std::size_t>(dim))
    throw std::invalid_argument("particle_draws: output span has the wrong size");
  for (std::size_t i = 0; i < count; ++i) {
    const auto [z0, z1] = rng::normal_pair(seed, static_cast<std::uint64_t>(step), static_cast<std::uint32_t>(i), 0);
    out[i * dim] = z0;
    if (dim > 1) out[i * dim + 1] = z1;
    if (dim > 2) out[i * dim + 2] = rng::normal_pair(seed, static_cast<std::uint64_t>(step), static_cast<std::uint32_t>(i), 1).first;
  }
}

ParticleState step_particles(const ParticleState& state, double dt, const KernelSpec& v,
                             std::span<const double> draws) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_particles needs dt > 0");
  if (draws.size() != state.positions.size()) throw std::invalid_argument("step_particles: draw count mismatch");
  ParticleState next = state;
  const double scale = std::sqrt(2.0 * dt);
  if (v.is_zero()) {
    for (std::size_t i = 0; i < next.positions.size(); ++i)
      next.positions[i] = wrap_unit(state.positions[i] + scale * draws[i]);
  } else {
    const auto drift = particle_drift(state, v);
    for (std::size_t i = 0; i < next.positions.size(); ++i)
      next.positions[i] = wrap_unit(state.positions[i] + drift[i] * dt + scale * draws[i]);
  }
  next.t = state.t + dt;
  next.step = state.step + 1;
  return next;
}

ParticleState run_particles(ParticleState state, double dt, long steps, const KernelSpec& v, std::uint64_t seed) {
  std::vector<double> draws(state.positions.size());
  for (long n = 0; n < steps; ++n) {
    particle_draws(seed, state.step, state.count(), state.dim, draws);
    state = step_particles(state, dt, v, draws);
  }
  return state;
}

EmpiricalDensity empirical_density(const ParticleState& state, const GridSpec& grid, double bandwidth) {
  if (grid.dim() != state.dim) throw std::invalid_argument("empirical_density: grid and particle dimensions differ");
  if (bandwidth < grid.spacing()) throw std::invalid_argument("empirical_density: bandwidth below grid spacing");
  if (state.count() == 0) throw std::invalid_argument("empirical_density: no particles");

  const int n = grid.n();
  const int d = grid.dim();
  RealField hist(grid);
  const double unit = 1.0 / (static_cast<double>(state.count()) * grid.cell_volume());
  for (std::size_t i = 0; i < state.count(); ++i) {
    std::array<int, 3> idx{0, 0, 0};
    const auto x = state.position(i);
    for (int a = 0; a < d; ++a) idx[a] = static_cast<int>(std::floor(x[a] * n + 0.5)) % n;
    hist[grid.flatten(idx)] += unit;
  }

  // Sampled periodic Gaussian, normalized to unit discrete mass.
  std::vector<double> profile(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / n;
    double s = 0.0;
    for (int m = -3; m <= 3; ++m) {
      const double y = x + m;
      s += std::exp(-y * y / (2.0 * bandwidth * bandwidth));
    }
    profile[i] = s;
    total += s;
  }
  for (auto& p : profile) p /= total * grid.spacing();
  RealField kernel(grid);
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const auto idx = grid.unflatten(f);
    double w = 1.0;
    for (int a = 0; a < d; ++a) w *= profile[idx[a]];
    kernel[f] = w;
  }
  SpectralField kernel_hat = forward(kernel);
  EmpiricalDensity out{convolve(kernel_hat, hist), bandwidth};
  for (auto& x : out.rho.values()) x = std::max(x, 0.0);
  return out;
}

ParticleState sample_particles(std::size_t count, int dim, const std::function<double(std::span<const double>)>& density,
                               double bound, std::uint64_t seed) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("sample_particles: dimension must be 1, 2 or 3");
  if (!(bound > 0.0)) throw std::invalid_argument("sample_particles: bound must be positive");
  ParticleState state;
  state.dim = dim;
  state.positions.resize(count * dim);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::uint32_t attempt = 0;; ++attempt) {
      if (attempt > 1000000) throw std::runtime_error("sample_particles: rejection sampler is not accepting");
      const auto [u0, u1] = rng::uniform_pair(seed, i, attempt, 0);
      const auto [u2, u3] = rng::uniform_pair(seed, i, attempt, 1);
      const std::array<double, 3> x{u0, u1, u2};
      const double accept = dim == 1 ? u1 : (dim == 2 ? u2 : u3);
      const double value = density(std::span<const double>(x.data(), dim));
      if (value > bound * (1.0 + 1e-12)) throw std::invalid_argument("sample_particles: density exceeds the bound");
      if (accept * bound <= value) {
        for (int a = 0; a < dim; ++a) state.positions[i * dim + a] = x[a];
        break;
      }
    }
  }
  return state;
}

RealField fluctuation_field(const RealField& empirical, const RealField& mean_field, std::size_t count) {
  require_same_grid(empirical.grid(), mean_field.grid(), "fluctuation_field");
  RealField out = empirical - mean_field;
  out *= std::sqrt(static_cast<double>(count));
  return out;
}

}  // namespace dk
