#include "dk/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "dk/diagnostics.hpp"
#include "dk/errors.hpp"
#include "dk/rng.hpp"

namespace dk {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wavenumber_squared(const GridSpec& grid, std::size_t flat) {
  const auto k = grid.wavevector(flat);
  double k2 = 0.0;
  for (int a = 0; a < grid.dim(); ++a) k2 += static_cast<double>(k[a]) * k[a];
  return k2;
}

std::uint64_t hash_doubles(std::span<const double> values, std::uint64_t h) {
  return fnv1a64(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(values.data()),
                                                values.size() * sizeof(double)),
                 h);
}

std::uint64_t hash_kernel(const KernelSpec& v, std::uint64_t h) {
  for (const auto& c : v.components) {
    const auto coeffs = c.coefficients();
    h = fnv1a64(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(coeffs.data()),
                                               coeffs.size() * sizeof(Complex)),
                h);
  }
  return h;
}

DiagnosticRow diagnose(const SpdeState& s) {
  DiagnosticRow row;
  row.t = s.t;
  row.mass = s.mass();
  row.min_rho = s.rho.min();
  row.entropy = row.min_rho < -kEntropyNegativeTolerance ? std::numeric_limits<double>::quiet_NaN()
                                                         : entropy(s.rho);
  row.dissipation = dissipation(s.rho);
  row.l2 = lp_norm(s.rho, 2.0);
  row.l4 = lp_norm(s.rho, 4.0);
  return row;
}

}  // namespace

std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t h) {
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& text) {
  return fnv1a64(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

// ------------------------------------------------------------ SolverConfig

long SolverConfig::steps() const { return std::lround((t_end - t_start) / dt); }

double SolverConfig::max_stable_dt() const {
  if (noise.empty() || noise_amplitude == 0.0 || !sigma_correction) return kInfinity;
  const FCoefficients F = compute_F(noise);
  const double diffusion =
      0.5 * noise_amplitude * noise_amplitude * F.F1.max() * SigmaFamily(sigma_n).max_derivative_squared();
  if (diffusion <= 0.0) return kInfinity;
  const double h = grid.spacing();
  return h * h / (8.0 * diffusion);
}

void SolverConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (grid.dim() == 0) fail("grid is not set");
  if (!(dt > 0.0)) fail("dt must be positive");
  if (!(t_start < t_end)) fail("time window needs t_start < t_end");
  const double ratio = (t_end - t_start) / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    fail("time window is not a whole number of steps");
  if (gamma && !(*gamma > 0.0 && *gamma <= 1.0)) fail("gamma must lie in (0, 1]");
  if (sigma_n < 2) fail("sigma index n must be >= 2");
  if (snapshot_stride < 0) fail("snapshot stride must be >= 0");
  if (!std::isfinite(noise_amplitude)) fail("noise amplitude must be finite");
  if (kernel.empty()) fail("kernel is not set");
  for (const auto& [t, v] : kernel.entries()) {
    if (!(v.grid == grid)) fail("kernel grid differs from the solver grid");
    if (static_cast<int>(v.components.size()) != grid.dim()) fail("kernel has the wrong number of components");
  }
  if (!(noise.grid == grid) && !noise.empty()) fail("noise grid differs from the solver grid");
  if (!(initial.grid() == grid)) fail("initial data grid differs from the solver grid");
  if (!initial.all_finite()) fail("initial data is not finite");
  const double limit = max_stable_dt();
  if (dt > limit) {
    std::ostringstream msg;
    msg << "dt = " << dt << " violates the explicit diffusion guard dt * D <= h^2/8 (max dt " << limit << ")";
    fail(msg.str());
  }
}

std::string describe(const SolverConfig& cfg) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "grid.dim=" << cfg.grid.dim() << "\n";
  out << "grid.n=" << cfg.grid.n() << "\n";
  std::uint64_t kh = 0xcbf29ce484222325ULL;
  for (const auto& [t, v] : cfg.kernel.entries()) {
    kh = hash_doubles(std::span<const double>(&t, 1), kh);
    kh = hash_kernel(v, kh);
  }
  out << "kernel.label=" << (cfg.kernel.empty() ? "" : cfg.kernel.entries().front().second.label) << "\n";
  out << "kernel.entries=" << cfg.kernel.entries().size() << "\n";
  out << "kernel.hash=" << std::hex << kh << std::dec << "\n";
  std::uint64_t nh = 0xcbf29ce484222325ULL;
  for (const auto& m : cfg.noise.modes) nh = hash_doubles(m.values(), nh);
  out << "noise.modes=" << cfg.noise.mode_count() << "\n";
  out << "noise.hash=" << std::hex << nh << std::dec << "\n";
  out << "noise.amplitude=" << cfg.noise_amplitude << "\n";
  out << "sigma.n=" << cfg.sigma_n << "\n";
  out << "sigma.correction=" << (cfg.sigma_correction ? 1 : 0) << "\n";
  out << "gamma=" << (cfg.gamma ? std::to_string(*cfg.gamma) : std::string("none")) << "\n";
  out << "time.start=" << cfg.t_start << "\n";
  out << "time.end=" << cfg.t_end << "\n";
  out << "time.dt=" << cfg.dt << "\n";
  out << "seed=" << cfg.seed << "\n";
  out << "clamp=" << (cfg.clamp == ClampPolicy::off ? "off" : "clamp-and-report") << "\n";
  out << "snapshot_stride=" << cfg.snapshot_stride << "\n";
  out << "initial.hash=" << std::hex << hash_doubles(cfg.initial.values(), 0xcbf29ce484222325ULL) << std::dec
      << "\n";
  return out.str();
}

std::uint64_t config_hash(const SolverConfig& cfg) { return fnv1a64(describe(cfg)); }

// ---------------------------------------------------------------- records

SpdeState SpdeState::from_field(const RealField& rho, double t) {
  SpdeState s;
  s.rho_hat = forward(rho);
  s.rho = rho;
  s.t = t;
  return s;
}

double TrajectoryRecord::relative_mass_drift() const {
  if (series.empty()) return 0.0;
  const double m0 = series.front().mass;
  double worst = 0.0;
  for (const auto& row : series) worst = std::max(worst, std::abs(row.mass - m0));
  return m0 != 0.0 ? worst / std::abs(m0) : worst;
}

FieldSeries TrajectoryRecord::snapshot_series() const {
  FieldSeries out;
  for (const auto& s : snapshots) {
    out.times.push_back(s.t);
    out.fields.push_back(s.rho);
  }
  return out;
}

// ------------------------------------------------------------------ Solver

Solver::Solver(SolverConfig cfg) : cfg_(std::move(cfg)), sigma_(cfg_.sigma_n < 2 ? 2 : cfg_.sigma_n) {
  cfg_.validate();
  kernel_ = cfg_.gamma ? cfg_.kernel.mollified(*cfg_.gamma) : cfg_.kernel;
  noise_ = cfg_.noise.empty() ? zero_noise(cfg_.grid) : cfg_.noise.scaled(cfg_.noise_amplitude);
  F_ = compute_F(noise_);
  const auto& grid = cfg_.grid;
  implicit_factor_.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    implicit_factor_[i] = 1.0 / (1.0 + cfg_.dt * kTwoPi * kTwoPi * wavenumber_squared(grid, i));
}

const KernelSpec& Solver::kernel_at(double t) const { return kernel_.at(t); }

SpdeState Solver::initial_state() const {
  SpdeState s = SpdeState::from_field(cfg_.initial, cfg_.t_start);
  return s;
}

VectorField Solver::drift_flux(const SpdeState& s) const {
  const auto& grid = cfg_.grid;
  const int d = grid.dim();
  SpectralField rho_hat_d = s.rho_hat;
  dealias(rho_hat_d);
  const RealField rho = inverse(rho_hat_d);

  VectorField flux(grid);
  const KernelSpec& v = kernel_at(s.t);
  if (!v.is_zero()) {
    for (int a = 0; a < d; ++a) {
      SpectralField u_hat(grid);
      const auto vc = v.components[a].coefficients();
      for (std::size_t i = 0; i < grid.size(); ++i) u_hat[i] = vc[i] * rho_hat_d[i];
      const RealField u = inverse(u_hat);
      for (std::size_t i = 0; i < grid.size(); ++i) flux[a][i] = -rho[i] * u[i];
    }
  }

  if (cfg_.sigma_correction && !noise_.empty()) {
    const auto grad_hat = spectral_gradient(rho_hat_d);
    for (int a = 0; a < d; ++a) {
      const RealField g = inverse(grad_hat[a]);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double sp = sigma_.derivative(rho[i]);
        flux[a][i] += 0.5 * (F_.F1[i] * sp * sp * g[i] + sigma_.value(rho[i]) * sp * F_.F2[a][i]);
      }
    }
  }
  return flux;
}

VectorField Solver::noise_flux(const SpdeState& s, std::span<const double> draws) const {
  const auto& grid = cfg_.grid;
  const int d = grid.dim();
  if (draws.size() != noise_.mode_count() * static_cast<std::size_t>(d))
    throw std::invalid_argument("noise draws do not match the mode count");
  VectorField flux(grid);
  if (noise_.empty()) return flux;

  for (std::size_t m = 0; m < noise_.mode_count(); ++m) {
    const auto f = noise_.modes[m].values();
    for (int a = 0; a < d; ++a) {
      const double b = draws[m * d + a];
      if (b == 0.0) continue;
      auto out = flux[a].values();
      for (std::size_t i = 0; i < grid.size(); ++i) out[i] += f[i] * b;
    }
  }
  SpectralField rho_hat_d = s.rho_hat;
  dealias(rho_hat_d);
  const RealField rho = inverse(rho_hat_d);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double sg = sigma_.value(rho[i]);
    for (int a = 0; a < d; ++a) flux[a][i] *= -sg;
  }
  return flux;
}

SpectralField Solver::flux_divergence(const VectorField& flux) const {
  std::vector<SpectralField> hat;
  hat.reserve(flux.dim());
  for (int a = 0; a < flux.dim(); ++a) {
    hat.push_back(forward(flux[a]));
    dealias(hat.back());
  }
  return spectral_divergence(hat);
}

RealField Solver::drift(const SpdeState& s) const {
  SpectralField out = flux_divergence(drift_flux(s));
  const SpectralField lap = spectral_laplacian(s.rho_hat);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += lap[i];
  return inverse(out);
}

RealField Solver::noise_increment(const SpdeState& s, std::span<const double> draws) const {
  return inverse(flux_divergence(noise_flux(s, draws)));
}

SpdeState Solver::step(const SpdeState& s, std::span<const double> draws) const {
  const auto& grid = cfg_.grid;
  const double dt = cfg_.dt;
  VectorField flux = drift_flux(s);
  const VectorField nflux = noise_flux(s, draws);
  for (int a = 0; a < grid.dim(); ++a) {
    auto f = flux[a].values();
    const auto g = nflux[a].values();
    for (std::size_t i = 0; i < grid.size(); ++i) f[i] = dt * f[i] + g[i];
  }
  const SpectralField rhs = flux_divergence(flux);

  SpdeState next;
  next.rho_hat = SpectralField(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) next.rho_hat[i] = (s.rho_hat[i] + rhs[i]) * implicit_factor_[i];
  // Every explicit term is a divergence; keep the mean bit for bit.
  next.rho_hat[0] = s.rho_hat[0];
  next.rho = inverse(next.rho_hat);
  next.t = cfg_.t_start + static_cast<double>(s.step + 1) * dt;
  next.step = s.step + 1;
  if (!next.rho.all_finite()) {
    std::ostringstream msg;
    msg << "non-finite density after step " << next.step << " (t = " << next.t << ")";
    throw NumericalAbort(msg.str(), next.t, next.step);
  }
  return next;
}

NoisePath Solver::noise_path() const {
  return NoisePath(rng::derive_seed(cfg_.seed, 0x6e6f697365ULL), cfg_.dt, cfg_.steps(), noise_.mode_count(),
                   cfg_.grid.dim());
}

TrajectoryRecord Solver::run() const { return run(noise_path()); }

namespace {

// Clamp negative values to zero and rescale to the previous mass.
bool clamp_state(SpdeState& s, std::vector<std::string>& events) {
  if (s.rho.min() >= 0.0) return false;
  const Complex mean = s.rho_hat[0];
  const double before = s.rho.min();
  for (auto& x : s.rho.values()) x = std::max(x, 0.0);
  const double mass = integrate(s.rho);
  if (mass > 0.0) s.rho *= mean.real() / mass;
  s.rho_hat = forward(s.rho);
  s.rho_hat[0] = mean;
  std::ostringstream msg;
  msg << std::setprecision(6) << "clamp step=" << s.step << " t=" << s.t << " min_rho=" << before
      << " rescale=" << (mass > 0.0 ? mean.real() / mass : 0.0);
  events.push_back(msg.str());
  return true;
}

template <class Advance>
TrajectoryRecord integrate_record(const SolverConfig& cfg, SpdeState state, Advance advance) {
  TrajectoryRecord rec;
  rec.seed = cfg.seed;
  rec.config_echo = describe(cfg);
  rec.config_hash = fnv1a64(rec.config_echo);
  rec.dt = cfg.dt;
  rec.snapshot_stride = cfg.snapshot_stride;

  const long steps = cfg.steps();
  const bool entropy_ok = cfg.initial.min() >= -kEntropyNegativeTolerance;
  if (!entropy_ok) rec.events.push_back("entropy diagnostics disabled: initial data is negative");

  auto record = [&](const SpdeState& s) {
    DiagnosticRow row = diagnose(s);
    if (!entropy_ok) row.entropy = std::numeric_limits<double>::quiet_NaN();
    if (row.min_rho < -10.0 * cfg.dt && !rec.unreliable) {
      rec.unreliable = true;
      std::ostringstream msg;
      msg << "unreliable: min_rho=" << row.min_rho << " below -10 dt at step " << s.step;
      rec.events.push_back(msg.str());
    }
    rec.series.push_back(row);
  };
  auto snapshot = [&](const SpdeState& s) { rec.snapshots.push_back({s.t, s.step, s.rho}); };

  record(state);
  snapshot(state);
  for (long n = 0; n < steps; ++n) {
    state = advance(state, n);
    if (cfg.clamp == ClampPolicy::clamp_and_report) clamp_state(state, rec.events);
    record(state);
    const bool last = n + 1 == steps;
    if (last || (cfg.snapshot_stride > 0 && (n + 1) % cfg.snapshot_stride == 0)) snapshot(state);
  }
  return rec;
}

}  // namespace

TrajectoryRecord Solver::run(const NoisePath& path) const {
  if (path.steps() != cfg_.steps() || std::abs(path.dt() - cfg_.dt) > 1e-12 * cfg_.dt)
    throw std::invalid_argument("noise path does not match the configured time grid");
  if (path.mode_count() != noise_.mode_count()) throw std::invalid_argument("noise path has the wrong mode count");
  std::vector<double> draws(noise_.mode_count() * cfg_.grid.dim());
  return integrate_record(cfg_, initial_state(), [&](const SpdeState& s, long n) {
    path.fill(n, draws);
    return step(s, draws);
  });
}

TrajectoryRecord run(const SolverConfig& cfg) { return Solver(cfg).run(); }

TrajectoryRecord mean_field_run(const SolverConfig& cfg_in) {
  SolverConfig cfg = cfg_in;
  cfg.noise = zero_noise(cfg.grid);
  cfg.noise_amplitude = 0.0;
  cfg.sigma_correction = false;
  const Solver solver(cfg);
  const auto& grid = cfg.grid;

  std::vector<double> heat(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    heat[i] = std::exp(-cfg.dt * kTwoPi * kTwoPi * wavenumber_squared(grid, i));

  return integrate_record(cfg, solver.initial_state(), [&](const SpdeState& s, long) {
    const KernelSpec& v = solver.kernel_at(s.t);
    SpdeState next;
    next.rho_hat = SpectralField(grid);
    if (v.is_zero()) {
      for (std::size_t i = 0; i < grid.size(); ++i) next.rho_hat[i] = s.rho_hat[i] * heat[i];
    } else {
      SpectralField rho_hat_d = s.rho_hat;
      dealias(rho_hat_d);
      const RealField rho = inverse(rho_hat_d);
      std::vector<SpectralField> flux_hat;
      for (int a = 0; a < grid.dim(); ++a) {
        SpectralField u_hat(grid);
        const auto vc = v.components[a].coefficients();
        for (std::size_t i = 0; i < grid.size(); ++i) u_hat[i] = vc[i] * rho_hat_d[i];
        const RealField u = inverse(u_hat);
        RealField flux(grid);
        for (std::size_t i = 0; i < grid.size(); ++i) flux[i] = -rho[i] * u[i];
        flux_hat.push_back(forward(flux));
        dealias(flux_hat.back());
      }
      const SpectralField div = spectral_divergence(flux_hat);
      for (std::size_t i = 0; i < grid.size(); ++i)
        next.rho_hat[i] = (s.rho_hat[i] + cfg.dt * div[i]) * heat[i];
    }
    next.rho_hat[0] = s.rho_hat[0];
    next.rho = inverse(next.rho_hat);
    next.step = s.step + 1;
    next.t = cfg.t_start + static_cast<double>(next.step) * cfg.dt;
    if (!next.rho.all_finite())
      throw NumericalAbort("non-finite density in mean-field run", next.t, next.step);
    return next;
  });
}

}  // namespace dk
