#include "dk/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dk/errors.hpp"

namespace dk {

namespace {

void require_entropy_domain(const RealField& rho, const char* what) {
  const double lo = rho.min();
  if (lo < -kEntropyNegativeTolerance) {
    std::ostringstream msg;
    msg << what << ": density is negative (min " << lo << ")";
    throw std::domain_error(msg.str());
  }
}

}  // namespace

double psi_entropy(double xi) { return xi > 0.0 ? xi * std::log(xi) - xi : 0.0; }

double entropy(const RealField& rho) {
  require_entropy_domain(rho, "entropy");
  double sum = 0.0;
  for (double x : rho.values()) sum += psi_entropy(x);
  return sum * rho.grid().cell_volume();
}

double rho_log_rho(const RealField& rho) {
  require_entropy_domain(rho, "rho_log_rho");
  double sum = 0.0;
  for (double x : rho.values())
    if (x > 0.0) sum += x * std::log(x);
  return sum * rho.grid().cell_volume();
}

double dissipation(const RealField& rho) {
  RealField root(rho.grid());
  for (std::size_t i = 0; i < rho.size(); ++i) root[i] = std::sqrt(std::max(rho[i], 0.0));
  return gradient_energy(root);
}

double gradient_energy(const RealField& rho) { return integrate(norm_squared(gradient(rho))); }

std::map<double, double> lm_norms(const RealField& rho, std::span<const double> ms) {
  std::map<double, double> out;
  for (double m : ms) out[m] = lp_norm(rho, m);
  return out;
}

double l1_distance(const RealField& a, const RealField& b) {
  require_same_grid(a.grid(), b.grid(), "l1_distance");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum * a.grid().cell_volume();
}

double L1Series::sup() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, v);
  return s;
}

L1Series l1_series(const TrajectoryRecord& a, const TrajectoryRecord& b) {
  if (a.snapshots.size() != b.snapshots.size()) throw GridMismatch("l1_series: snapshot counts differ");
  L1Series out;
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    if (a.snapshots[i].t != b.snapshots[i].t) throw GridMismatch("l1_series: snapshot times differ");
    out.times.push_back(a.snapshots[i].t);
    out.values.push_back(l1_distance(a.snapshots[i].rho, b.snapshots[i].rho));
  }
  return out;
}

double kinetic_distance(const RealField& rho1, const RealField& rho2, int bins, std::optional<double> xi_max) {
  require_same_grid(rho1.grid(), rho2.grid(), "kinetic_distance");
  if (bins < 1) throw std::invalid_argument("kinetic_distance needs at least one bin");
  const double top = xi_max ? *xi_max : std::max(rho1.max(), rho2.max());
  if (!(top > 0.0)) return 0.0;
  const double width = top / bins;
  // chi_i(centre_b) = 1 exactly for the first count(rho_i) centres, so the
  // xi integral of |chi_1 - chi_2|^2 is |count_1 - count_2| * width.
  auto count = [&](double rho) {
    const double c = std::floor(rho / width + 0.5);
    return static_cast<long>(std::clamp(c, 0.0, static_cast<double>(bins)));
  };
  long total = 0;
  for (std::size_t i = 0; i < rho1.size(); ++i) total += std::labs(count(rho1[i]) - count(rho2[i]));
  return static_cast<double>(total) * width * rho1.grid().cell_volume();
}

// ------------------------------------------------------- KineticHistogram

KineticHistogram::KineticHistogram(int levels) : levels_(levels) {
  if (levels < 0 || levels > 60) throw std::invalid_argument("kinetic histogram levels must lie in [0, 60]");
  weights_.assign(static_cast<std::size_t>(levels) + 2, 0.0);
}

double KineticHistogram::lo(std::size_t b) const {
  if (b == 0) return -kInfinity;
  if (b <= static_cast<std::size_t>(levels_) + 1) return std::ldexp(1.0, -(levels_ + 2 - static_cast<int>(b)));
  return static_cast<double>(b - levels_ - 1);
}

double KineticHistogram::hi(std::size_t b) const {
  if (b <= static_cast<std::size_t>(levels_) + 1) return std::ldexp(1.0, -(levels_ + 1 - static_cast<int>(b)));
  return static_cast<double>(b - levels_);
}

std::size_t KineticHistogram::bin_of(double xi) const {
  if (!(xi > std::ldexp(1.0, -(levels_ + 1)))) return 0;
  if (xi <= 1.0) {
    int e = 0;
    const double f = std::frexp(xi, &e);  // xi = f 2^e, f in [1/2, 1)
    const int m = f == 0.5 ? 1 - e : -e;  // xi in (2^-(m+1), 2^-m]
    return static_cast<std::size_t>(levels_ + 1 - m);
  }
  const double M = std::ceil(xi) - 1.0;
  return static_cast<std::size_t>(levels_ + 1) + static_cast<std::size_t>(M);
}

void KineticHistogram::grow_to(std::size_t bins) {
  if (bins > weights_.size()) weights_.resize(bins, 0.0);
}

void KineticHistogram::add(const RealField& rho, double dt) {
  const RealField g2 = norm_squared(gradient(rho));
  const double scale = dt * rho.grid().cell_volume();
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!std::isfinite(rho[i])) throw std::invalid_argument("kinetic histogram: non-finite density");
    const std::size_t b = bin_of(rho[i]);
    grow_to(b + 1);
    weights_[b] += g2[i] * scale;
  }
}

void KineticHistogram::merge(const KineticHistogram& other) {
  if (other.levels_ != levels_) throw std::invalid_argument("kinetic histograms have different layouts");
  grow_to(other.weights_.size());
  for (std::size_t b = 0; b < other.weights_.size(); ++b) weights_[b] += other.weights_[b];
}

double KineticHistogram::total() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

double KineticHistogram::mass_near_infinity(int M) const {
  if (M < 1) throw std::invalid_argument("mass_near_infinity needs M >= 1");
  const std::size_t b = static_cast<std::size_t>(levels_ + 1 + M);
  return b < weights_.size() ? weights_[b] : 0.0;
}

double KineticHistogram::scaled_mass_near_zero(int m) const {
  if (m < 0 || m > levels_) throw std::invalid_argument("scaled_mass_near_zero: level outside the histogram");
  return weights_[static_cast<std::size_t>(levels_ + 1 - m)] / std::ldexp(1.0, -m);
}

KineticHistogram accumulate_kinetic_measure(const TrajectoryRecord& traj, int levels) {
  KineticHistogram h(levels);
  for (std::size_t i = 0; i + 1 < traj.snapshots.size(); ++i)
    h.add(traj.snapshots[i].rho, traj.snapshots[i + 1].t - traj.snapshots[i].t);
  return h;
}

double kinetic_total_reference(const TrajectoryRecord& traj) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < traj.snapshots.size(); ++i)
    s += (traj.snapshots[i + 1].t - traj.snapshots[i].t) * gradient_energy(traj.snapshots[i].rho);
  return s;
}

KineticTails kinetic_tails(const KineticHistogram& h, int max_M) {
  KineticTails out;
  for (int M = 1; M <= max_M; ++M) {
    out.M.push_back(M);
    out.infinity_mass.push_back(h.mass_near_infinity(M));
  }
  for (int m = 0; m <= h.levels(); ++m) {
    out.beta.push_back(std::ldexp(1.0, -m));
    out.zero_mass.push_back(h.scaled_mass_near_zero(m));
  }
  return out;
}

// ---------------------------------------------------------- EntropyReport

double EntropyReport::budget() const {
  if (running_sup_entropy.empty()) return 0.0;
  return running_sup_entropy.back() + dissipation_integral.back();
}

bool EntropyReport::finite() const {
  for (double v : entropy)
    if (!std::isfinite(v)) return false;
  return std::isfinite(budget());
}

EntropyReport entropy_report(const TrajectoryRecord& traj) {
  EntropyReport r;
  double sup = -kInfinity;
  double integral = 0.0;
  for (std::size_t i = 0; i < traj.series.size(); ++i) {
    const auto& row = traj.series[i];
    if (i > 0) {
      const auto& prev = traj.series[i - 1];
      integral += (row.t - prev.t) * prev.dissipation;
    }
    sup = std::isnan(row.entropy) ? row.entropy : std::max(sup, row.entropy);
    r.times.push_back(row.t);
    r.entropy.push_back(row.entropy);
    r.rho_log_rho.push_back(row.entropy + row.mass);
    r.dissipation.push_back(row.dissipation);
    r.running_sup_entropy.push_back(sup);
    r.dissipation_integral.push_back(integral);
  }
  return r;
}

// --------------------------------------------------------------- GN audit

RealField derivative_magnitude(const RealField& f, int j) {
  const GridSpec& grid = f.grid();
  if (j == 0) {
    RealField out = f;
    for (auto& x : out.values()) x = std::abs(x);
    return out;
  }
  const auto grad_hat = spectral_gradient(forward(f));
  RealField sum(grid);
  if (j == 1) {
    for (const auto& g_hat : grad_hat) {
      const RealField g = inverse(g_hat);
      for (std::size_t i = 0; i < grid.size(); ++i) sum[i] += g[i] * g[i];
    }
  } else if (j == 2) {
    for (const auto& g_hat : grad_hat)
      for (const auto& h_hat : spectral_gradient(g_hat)) {
        const RealField h = inverse(h_hat);
        for (std::size_t i = 0; i < grid.size(); ++i) sum[i] += h[i] * h[i];
      }
  } else {
    throw std::invalid_argument("derivative order must be 0, 1 or 2");
  }
  for (auto& x : sum.values()) x = std::sqrt(x);
  return sum;
}

GnReport gn_audit(const RealField& f, int j, int m, double p, double q, double r, double alpha) {
  const int d = f.grid().dim();
  auto inv = [](double x) { return std::isinf(x) ? 0.0 : 1.0 / x; };
  if (j < 0 || j > 2 || m < 0 || m > 2) throw std::invalid_argument("gn_audit: j and m must lie in {0, 1, 2}");
  if (p < 1.0 || q < 1.0 || r < 1.0) throw std::invalid_argument("gn_audit: exponents must be >= 1");
  const double lower = m == 0 ? (j == 0 ? 0.0 : kInfinity) : static_cast<double>(j) / m;
  if (!(alpha >= lower && alpha <= 1.0)) throw std::invalid_argument("gn_audit: need j/m <= alpha <= 1");
  const double relation = static_cast<double>(j) / d + (inv(r) - static_cast<double>(m) / d) * alpha +
                          (1.0 - alpha) * inv(q);
  if (std::abs(inv(p) - relation) > 1e-12) {
    std::ostringstream msg;
    msg << "gn_audit: exponent relation violated, 1/p = " << inv(p) << " but the right side is " << relation;
    throw std::invalid_argument(msg.str());
  }
  GnReport rep;
  rep.lhs = lp_norm(derivative_magnitude(f, j), p);
  rep.grad_norm = lp_norm(derivative_magnitude(f, m), r);
  rep.f_norm = lp_norm(f, q);
  rep.rhs = std::pow(rep.grad_norm, alpha) * std::pow(rep.f_norm, 1.0 - alpha);
  if (rep.lhs == 0.0) rep.ratio = 0.0;
  else rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : kInfinity;
  return rep;
}

// ------------------------------------------------------ convolution audit

ConvolutionAudit convolution_estimate_audit(const RealField& f, const RealField& g, const KernelSpec& v, double p,
                                            double q) {
  require_same_grid(f.grid(), g.grid(), "convolution_estimate_audit");
  require_same_grid(f.grid(), v.grid, "convolution_estimate_audit");
  const GridSpec& grid = f.grid();
  const double d = grid.dim();
  auto ratio = [](double lhs, double rhs) {
    if (lhs == 0.0) return 0.0;
    return rhs > 0.0 ? lhs / rhs : kInfinity;
  };
  auto inv = [](double x) { return std::isinf(x) ? 0.0 : 1.0 / x; };

  const double grad_root = std::sqrt(dissipation(f));
  const double f1 = lp_norm(f, 1.0);
  const double g1 = lp_norm(g, 1.0);

  ConvolutionAudit out;
  const VectorField grad_f = gradient(f);
  const VectorField u = apply(v, g);
  RealField transport(grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (int a = 0; a < grid.dim(); ++a) transport[i] += grad_f[a][i] * u[a][i];
  out.transport_lhs = lp_norm(transport, 1.0);
  out.transport_rhs = std::pow(grad_root, d * inv(p) + 1.0) * std::pow(f1, 0.5 - d * inv(p) / 2.0) *
                      lp_norm(physical(v), p) * g1;
  out.transport_constant = ratio(out.transport_lhs, out.transport_rhs);

  const SpectralField div_v = divergence_of(v);
  const RealField div_conv = convolve(div_v, g);
  out.divergence_lhs = lp_norm(hadamard(f, div_conv), 1.0);
  out.divergence_rhs = std::pow(grad_root, d * inv(q)) * std::pow(f1, 1.0 - d * inv(q) / 2.0) *
                       lp_norm(inverse(div_v), q) * g1;
  out.divergence_constant = ratio(out.divergence_lhs, out.divergence_rhs);
  return out;
}

}  // namespace dk
