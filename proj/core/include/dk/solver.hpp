#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dk/grid.hpp"
#include "dk/kernels.hpp"
#include "dk/noise.hpp"
#include "dk/regularization.hpp"

namespace dk {

enum class ClampPolicy {
  off,
  /// Negative values are set to 0 and the field rescaled to its previous mass.
  clamp_and_report,
};

struct SolverConfig {
  GridSpec grid;
  /// Unmollified kernel; gamma is applied when the solver is built.
  KernelSchedule kernel;
  /// Unit-amplitude noise family; noise_amplitude multiplies every mode.
  NoiseSpec noise;
  int sigma_n = 16;
  /// Mollification scale in (0, 1]; unset runs with the raw kernel.
  std::optional<double> gamma;
  double t_start = 0.0;
  double t_end = 0.1;
  double dt = 1e-4;
  std::uint64_t seed = 0;
  double noise_amplitude = 1.0;
  ClampPolicy clamp = ClampPolicy::off;
  /// Keep a snapshot every this many steps (0: initial and final only).
  int snapshot_stride = 0;
  /// Include the Ito correction 1/2 div(F1 sigma'^2 grad rho + sigma sigma' F2).
  bool sigma_correction = true;
  RealField initial;

  long steps() const;
  /// Throws ConfigError on: dt <= 0, t_start >= t_end, a window that is not a
  /// whole number of steps, gamma outside (0, 1], sigma_n < 2, grid mismatch
  /// between the pieces, non-finite initial data, or a step that violates the
  /// explicit-diffusion guard dt * D <= h^2 / 8 with
  /// D = 1/2 * noise_amplitude^2 * max F1 * sup sigma_n'^2.
  void validate() const;
  /// Largest dt the guard admits (infinity without noise).
  double max_stable_dt() const;
};

/// key=value lines describing every parameter, used for hashing and echoing.
std::string describe(const SolverConfig& cfg);
std::uint64_t config_hash(const SolverConfig& cfg);
std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(const std::string& text);

struct SpdeState {
  SpectralField rho_hat;
  RealField rho;
  double t = 0.0;
  long step = 0;

  /// Re of the zero Fourier coefficient, i.e. the integral of rho.
  double mass() const { return rho_hat[0].real(); }
  static SpdeState from_field(const RealField& rho, double t);
};

struct DiagnosticRow {
  double t = 0.0;
  double mass = 0.0;
  /// int Psi(rho); NaN when rho is materially negative.
  double entropy = 0.0;
  /// int |grad sqrt(max(rho, 0))|^2
  double dissipation = 0.0;
  double min_rho = 0.0;
  double l2 = 0.0;
  double l4 = 0.0;
};

struct Snapshot {
  double t = 0.0;
  long step = 0;
  RealField rho;
};

struct TrajectoryRecord {
  std::vector<DiagnosticRow> series;  // one row per step, including t_start
  std::vector<Snapshot> snapshots;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::string config_echo;
  double dt = 0.0;
  int snapshot_stride = 0;
  /// Set when min rho dropped below -10 dt at some step.
  bool unreliable = false;
  std::vector<std::string> events;

  const RealField& final_field() const { return snapshots.back().rho; }
  /// Largest |mass(t) - mass(t_start)| / |mass(t_start)|.
  double relative_mass_drift() const;
  FieldSeries snapshot_series() const;
};

class Solver {
 public:
  explicit Solver(SolverConfig cfg);

  const SolverConfig& config() const { return cfg_; }
  const FCoefficients& F() const { return F_; }
  /// Noise family with noise_amplitude applied.
  const NoiseSpec& noise() const { return noise_; }
  const KernelSpec& kernel_at(double t) const;

  SpdeState initial_state() const;
  /// Full drift: Laplacian rho - div(rho V * rho) + Ito correction.
  RealField drift(const SpdeState& s) const;
  /// -sum_k div(sigma_n(rho) f_k dbeta_k); draws laid out [mode * d + axis].
  RealField noise_increment(const SpdeState& s, std::span<const double> draws) const;
  /// One semi-implicit Euler-Maruyama step.  The zero mode is carried over
  /// unchanged.  Throws NumericalAbort on a non-finite result.
  SpdeState step(const SpdeState& s, std::span<const double> draws) const;

  NoisePath noise_path() const;
  TrajectoryRecord run() const;
  /// Runs along a given path; its step count and dt must match the config.
  TrajectoryRecord run(const NoisePath& path) const;

 private:
  // Explicit non-Laplacian flux -rho u + 1/2 (F1 sigma'^2 grad rho + sigma sigma' F2).
  VectorField drift_flux(const SpdeState& s) const;
  // -sigma(rho) G with G_a = sum_k f_k dbeta_{k,a}.
  VectorField noise_flux(const SpdeState& s, std::span<const double> draws) const;
  SpectralField flux_divergence(const VectorField& flux) const;

  SolverConfig cfg_;
  KernelSchedule kernel_;
  NoiseSpec noise_;
  FCoefficients F_;
  SigmaFamily sigma_;
  std::vector<double> implicit_factor_;  // 1 / (1 + dt 4 pi^2 |k|^2)
};

TrajectoryRecord run(const SolverConfig& cfg);

/// Deterministic mean-field equation d rho = Laplacian rho - div(rho V * rho):
/// noise and Ito correction off, heat part integrated exactly.
TrajectoryRecord mean_field_run(const SolverConfig& cfg);

/// Real trigonometric eigenbasis of -Laplacian: the constant 1, then
/// sqrt2 cos(2 pi k.x), sqrt2 sin(2 pi k.x) over half-space k ordered by
/// |k|^2 and lexicographically.
struct GalerkinMode {
  enum Kind { constant, cosine, sine };
  Kind kind = constant;
  std::array<int, 3> k{0, 0, 0};
};

/// The first `count` basis functions; throws if one leaves the dealiased band.
std::vector<GalerkinMode> galerkin_basis(const GridSpec& grid, int count);
RealField basis_function(const GridSpec& grid, const GalerkinMode& mode);

/// A^{ijk} = int e_i (V * e_j) . grad e_k over the torus, for indices into
/// galerkin_basis(V.grid, band).  Throws std::out_of_range for indices
/// outside the band.
double galerkin_coefficient(int i, int j, int k, const KernelSpec& v, int band);

}  // namespace dk
