#include "dk/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "dk/rng.hpp"

namespace dk {

NoiseSpec NoiseSpec::scaled(double alpha) const {
  NoiseSpec out = *this;
  for (auto& m : out.modes) m *= alpha;
  out.epsilon *= alpha;
  return out;
}

std::vector<std::array<int, 3>> uv_wavevectors(int dim, int K) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("uv_wavevectors: dimension must be 1, 2 or 3");
  if (K < 0) throw std::invalid_argument("uv_wavevectors: K must be >= 0");
  std::vector<std::array<int, 3>> out;
  const int lo = -K, hi = K;
  for (int k0 = lo; k0 <= hi; ++k0)
    for (int k1 = (dim > 1 ? lo : 0); k1 <= (dim > 1 ? hi : 0); ++k1)
      for (int k2 = (dim > 2 ? lo : 0); k2 <= (dim > 2 ? hi : 0); ++k2) {
        const std::array<int, 3> k{k0, k1, k2};
        const int norm2 = k0 * k0 + k1 * k1 + k2 * k2;
        if (norm2 == 0 || norm2 > K * K) continue;
        const int lead = k0 != 0 ? k0 : (k1 != 0 ? k1 : k2);
        if (lead < 0) continue;
        out.push_back(k);
      }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    const int na = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
    const int nb = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    return na != nb ? na < nb : a < b;
  });
  return out;
}

NoiseSpec uv_noise(const GridSpec& grid, int K, std::span<const double> amplitudes, double epsilon) {
  if (K > grid.dealias_cutoff())
    throw std::invalid_argument("uv_noise: K exceeds the dealiased band n/3");
  const auto ks = uv_wavevectors(grid.dim(), K);
  if (amplitudes.size() < ks.size()) {
    std::ostringstream msg;
    msg << "uv_noise: " << ks.size() << " wavevectors need as many amplitudes, got " << amplitudes.size();
    throw std::invalid_argument(msg.str());
  }
  NoiseSpec noise;
  noise.grid = grid;
  noise.epsilon = epsilon;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    const auto k = ks[j];
    const double a = epsilon * amplitudes[j];
    RealField s(grid), c(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto x = grid.point(i);
      double phase = 0.0;
      for (int d = 0; d < grid.dim(); ++d) phase += k[d] * x[d];
      // 2 pi k.x reduced modulo 1 first so that large phases stay accurate.
      phase -= std::floor(phase);
      const double theta = 2.0 * std::numbers::pi * phase;
      s[i] = a * std::sin(theta);
      c[i] = a * std::cos(theta);
    }
    noise.modes.push_back(std::move(s));
    noise.modes.push_back(std::move(c));
    noise.wavevectors.push_back(k);
    noise.wavevectors.push_back(k);
    noise.amplitudes.push_back(amplitudes[j]);
    noise.amplitudes.push_back(amplitudes[j]);
  }
  return noise;
}

NoiseSpec custom_noise(const GridSpec& grid, std::vector<RealField> modes) {
  for (const auto& m : modes) require_same_grid(m.grid(), grid, "custom_noise");
  NoiseSpec noise;
  noise.grid = grid;
  noise.amplitudes.assign(modes.size(), 1.0);
  noise.modes = std::move(modes);
  return noise;
}

NoiseSpec zero_noise(const GridSpec& grid) {
  NoiseSpec noise;
  noise.grid = grid;
  return noise;
}

namespace {

// True for families laid out as uv_noise builds them: (sin, cos) pairs that
// share a wavevector.
bool is_sin_cos_paired(const NoiseSpec& noise) {
  if (noise.wavevectors.size() != noise.modes.size() || noise.modes.size() % 2 != 0) return false;
  for (std::size_t m = 0; m < noise.modes.size(); m += 2)
    if (noise.wavevectors[m] != noise.wavevectors[m + 1]) return false;
  return true;
}

}  // namespace

FCoefficients compute_F(const NoiseSpec& noise, double tol) {
  const auto& grid = noise.grid;
  FCoefficients F{RealField(grid), VectorField(grid), RealField(grid), 0.0, 0.0, {}};
  const bool paired = is_sin_cos_paired(noise);
  // Exact Laplacian of F1 for paired families; spectral otherwise.
  RealField lap_F1(grid);
  for (std::size_t m = 0; m < noise.modes.size(); ++m) {
    const RealField& f = noise.modes[m];
    if (paired) {
      // d/dx_a (a sin 2 pi k.x) = 2 pi k_a (a cos 2 pi k.x) and
      // d/dx_a (a cos 2 pi k.x) = -2 pi k_a (a sin 2 pi k.x), so f grad f is
      // +-2 pi k_a (s c) and cancels exactly within each pair.
      const bool is_sin = m % 2 == 0;
      const RealField& partner = noise.modes[is_sin ? m + 1 : m - 1];
      const auto& k = noise.wavevectors[m];
      double k2 = 0.0;
      for (int a = 0; a < grid.dim(); ++a) k2 += (2.0 * std::numbers::pi * k[a]) * (2.0 * std::numbers::pi * k[a]);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        F.F1[i] += f[i] * f[i];
        // Laplacian f^2 = 2|grad f|^2 + 2 f Laplacian f = 2|k|^2 (partner^2 - f^2).
        lap_F1[i] += 2.0 * (k2 * (partner[i] * partner[i]) - k2 * (f[i] * f[i]));
        const double sc = is_sin ? f[i] * partner[i] : partner[i] * f[i];
        for (int a = 0; a < grid.dim(); ++a) {
          const double wave = 2.0 * std::numbers::pi * k[a];
          F.F2[a][i] += is_sin ? wave * sc : -(wave * sc);
          F.F3[i] += (wave * partner[i]) * (wave * partner[i]);
        }
      }
      continue;
    }
    const VectorField g = gradient(f);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      F.F1[i] += f[i] * f[i];
      for (int a = 0; a < grid.dim(); ++a) {
        F.F2[a][i] += f[i] * g[a][i];  // 1/2 grad f^2 = f grad f
        F.F3[i] += g[a][i] * g[a][i];
      }
    }
  }
  F.div_F2_max = lp_norm(divergence(F.F2), kInfinity);
  F.lap_F1_max = lp_norm(paired ? lap_F1 : laplacian(F.F1), kInfinity);
  if (F.div_F2_max > tol || F.lap_F1_max > tol) {
    std::ostringstream msg;
    msg << "noise violates div F2 = Laplacian F1 / 2 = 0: max|div F2| = " << F.div_F2_max
        << ", max|Laplacian F1| = " << F.lap_F1_max;
    F.diagnostic = msg.str();
  }
  return F;
}

// --------------------------------------------------------------- NoisePath

NoisePath::NoisePath(std::uint64_t seed, double dt, long steps, std::size_t modes, int dim)
    : seed_(seed), dt_(dt), steps_(steps), modes_(modes), dim_(dim) {
  if (!(dt > 0.0)) throw std::invalid_argument("noise path needs dt > 0");
  if (steps < 0) throw std::invalid_argument("noise path needs steps >= 0");
}

void NoisePath::fill_fine(long fine_step, std::span<double> out) const {
  const double scale = std::sqrt(dt_);
  for (std::size_t m = 0; m < modes_; ++m) {
    const auto [z0, z1] = rng::normal_pair(seed_, static_cast<std::uint64_t>(fine_step), static_cast<std::uint32_t>(m), 0);
    out[m * dim_] = scale * z0;
    if (dim_ > 1) out[m * dim_ + 1] = scale * z1;
    if (dim_ > 2) {
      const auto [z2, unused] = rng::normal_pair(seed_, static_cast<std::uint64_t>(fine_step), static_cast<std::uint32_t>(m), 1);
      (void)unused;
      out[m * dim_ + 2] = scale * z2;
    }
  }
}

void NoisePath::fill(long step, std::span<double> out) const {
  if (out.size() != modes_ * dim_) throw std::invalid_argument("NoisePath::fill: output span has the wrong size");
  if (coarsening_ == 1) {
    fill_fine(step, out);
    return;
  }
  std::vector<double> fine(out.size());
  std::fill(out.begin(), out.end(), 0.0);
  for (int j = 0; j < coarsening_; ++j) {
    fill_fine(step * coarsening_ + j, fine);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += fine[i];
  }
}

std::vector<double> NoisePath::draws(long step) const {
  std::vector<double> out(modes_ * dim_);
  fill(step, out);
  return out;
}

NoisePath NoisePath::coarsened(int factor) const {
  if (factor < 1) throw std::invalid_argument("coarsening factor must be >= 1");
  if (steps_ % factor != 0) throw std::invalid_argument("coarsening factor must divide the step count");
  NoisePath out = *this;
  out.coarsening_ = coarsening_ * factor;
  out.steps_ = steps_ / factor;
  return out;
}

NoisePath sample_path(const NoiseSpec& noise, double dt, long steps, std::uint64_t seed) {
  return NoisePath(seed, dt, steps, noise.mode_count(), noise.grid.dim());
}

}  // namespace dk
