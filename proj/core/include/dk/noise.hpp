#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dk/grid.hpp"

namespace dk {

/// Finite family of spatial noise modes {f_k}; W^F = sum_k f_k B^k where each
/// B^k is a d-dimensional Brownian motion (one independent component per axis).
struct NoiseSpec {
  GridSpec grid;
  /// f_k with every amplitude (including epsilon) already applied.
  std::vector<RealField> modes;
  /// Wavevector behind each mode when the family is trigonometric; empty otherwise.
  std::vector<std::array<int, 3>> wavevectors;
  /// Per-mode amplitude a_k before the epsilon factor.
  std::vector<double> amplitudes;
  double epsilon = 1.0;

  std::size_t mode_count() const { return modes.size(); }
  bool empty() const { return modes.empty(); }
  /// Same family with every mode multiplied by alpha.
  NoiseSpec scaled(double alpha) const;
};

/// Half-space representatives k (first nonzero component positive) with
/// 0 < |k| <= K, ordered by |k|^2 then lexicographically.
std::vector<std::array<int, 3>> uv_wavevectors(int dim, int K);

/// Ultraviolet-type family: for every k of uv_wavevectors(d, K) the pair
/// eps*a_k sin(2 pi k.x), eps*a_k cos(2 pi k.x).  amplitudes holds one a_k
/// per wavevector; throws if it is shorter or if K exceeds the dealiased band.
NoiseSpec uv_noise(const GridSpec& grid, int K, std::span<const double> amplitudes, double epsilon = 1.0);

/// Arbitrary mode family (no wavevector metadata).
NoiseSpec custom_noise(const GridSpec& grid, std::vector<RealField> modes);
NoiseSpec zero_noise(const GridSpec& grid);

/// Quadratic aggregates of the noise modes:
///   F1 = sum f_k^2, F2 = 1/2 sum grad f_k^2, F3 = sum |grad f_k|^2.
struct FCoefficients {
  RealField F1;
  VectorField F2;
  RealField F3;
  /// max |div F2| and max |Laplacian F1| (the standing assumption wants both 0).
  double div_F2_max = 0.0;
  double lap_F1_max = 0.0;
  /// Non-empty when the standing assumption fails beyond tolerance.
  std::string diagnostic;

  bool standing_assumption_holds() const { return diagnostic.empty(); }
};

/// Families built by uv_noise use the exact derivatives of their sin/cos
/// pairs, so F2 and Laplacian F1 vanish identically; other families use
/// spectral derivatives.
FCoefficients compute_F(const NoiseSpec& noise, double tol = 1e-10);

/// Replayable Brownian increments.  Increment (step, mode, axis) is a pure
/// function of (seed, step, mode): draws need no storage and can be
/// generated in any order or in parallel.
class NoisePath {
 public:
  NoisePath(std::uint64_t seed, double dt, long steps, std::size_t modes, int dim);

  std::uint64_t seed() const { return seed_; }
  double dt() const { return dt_ * coarsening_; }
  long steps() const { return steps_; }
  std::size_t mode_count() const { return modes_; }
  int dim() const { return dim_; }
  int coarsening() const { return coarsening_; }

  /// Writes the draws of one step, laid out [mode * dim + axis]; each is
  /// N(0, dt()).
  void fill(long step, std::span<double> out) const;
  std::vector<double> draws(long step) const;

  /// Same Brownian path at time step factor * dt(): each increment is the sum
  /// of `factor` consecutive increments of this path.
  NoisePath coarsened(int factor) const;

 private:
  void fill_fine(long fine_step, std::span<double> out) const;

  std::uint64_t seed_;
  double dt_;  // finest step
  long steps_;
  std::size_t modes_;
  int dim_;
  int coarsening_ = 1;
};

/// Throws for dt <= 0 or steps < 0.
NoisePath sample_path(const NoiseSpec& noise, double dt, long steps, std::uint64_t seed);

}  // namespace dk
