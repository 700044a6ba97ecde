#include "dk/regularization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dk/errors.hpp"

namespace dk {

double smoothstep5(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

double smoothstep5_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double u = t * (1.0 - t);
  return 30.0 * u * u;
}

// ------------------------------------------------------------ SigmaFamily

namespace {

double sigma_weight(double s, int n) {
  const double inv_n = 1.0 / n;
  if (s <= inv_n || s >= 2.0 * n) return 0.0;
  if (s < 2.0 * inv_n) return smoothstep5(n * s - 1.0);
  if (s <= n) return 1.0;
  return 1.0 - smoothstep5(s / n - 1.0);
}

}  // namespace

SigmaFamily::SigmaFamily(int n) : n_(n) {
  if (n < 2) throw std::invalid_argument("sigma_n requires n >= 2");
  const double lo = 1.0 / n;
  at_2_over_n_ = blend_integral(lo, 2.0 * lo);
  at_n_ = at_2_over_n_ + std::sqrt(static_cast<double>(n)) - std::sqrt(2.0 * lo);
  at_2n_ = at_n_ + blend_integral(n, 2.0 * n);

  max_derivative_squared_ = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double g = derivative(lo + lo * i / 2000.0);
    max_derivative_squared_ = std::max(max_derivative_squared_, g * g);
  }
}

double SigmaFamily::blend_integral(double a, double b) const {
  if (b <= a) return 0.0;
  // Each blend is a polynomial times s^{-1/2} on an interval [c, 2c], so a
  // fixed 30-point Gauss rule is exact to rounding.
  const int n = n_;
  auto g = [n](double s) { return sigma_weight(s, n) / (2.0 * std::sqrt(s)); };
  return boost::math::quadrature::gauss<double, 30>::integrate(g, a, b);
}

double SigmaFamily::value(double xi) const {
  const double lo = 1.0 / n_;
  if (xi <= lo) return 0.0;
  if (xi < 2.0 * lo) return blend_integral(lo, xi);
  if (xi <= n_) return at_2_over_n_ + std::sqrt(xi) - std::sqrt(2.0 * lo);
  if (xi < 2.0 * n_) return at_n_ + blend_integral(n_, xi);
  return at_2n_;
}

double SigmaFamily::derivative(double xi) const {
  if (xi <= 0.0) return 0.0;
  return sigma_weight(xi, n_) / (2.0 * std::sqrt(xi));
}

SigmaFamily sigma(int n) { return SigmaFamily(n); }

// ---------------------------------------------------------------- cutoffs

CutoffPhi::CutoffPhi(double beta) : beta_(beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("phi_beta requires beta in (0, 1)");
}

double CutoffPhi::operator()(double xi) const {
  if (xi >= beta_) return 1.0;
  if (xi <= beta_ / 2.0) return 0.0;
  return (2.0 / beta_) * (xi - beta_ / 2.0);
}

double CutoffPhi::derivative(double xi) const {
  return (xi > beta_ / 2.0 && xi < beta_) ? 2.0 / beta_ : 0.0;
}

CutoffZeta::CutoffZeta(int M) : M_(M) {
  if (M < 1) throw std::invalid_argument("zeta_M requires M >= 1");
}

double CutoffZeta::operator()(double xi) const {
  if (xi <= M_) return 1.0;
  if (xi >= M_ + 1.0) return 0.0;
  return (M_ + 1.0) - xi;
}

double CutoffZeta::derivative(double xi) const { return (xi > M_ && xi < M_ + 1.0) ? -1.0 : 0.0; }

CutoffPhi phi_beta(double beta) { return CutoffPhi(beta); }
CutoffZeta zeta_M(int M) { return CutoffZeta(M); }

// ----------------------------------------------------------------- HDelta

HDelta::HDelta(double delta) : delta_(delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("h_delta requires delta in (0, 1]");
}

double HDelta::psi(double xi) const { return smoothstep5((xi - delta_ / 2.0) / (delta_ / 2.0)); }

double HDelta::psi_derivative(double xi) const {
  return smoothstep5_derivative((xi - delta_ / 2.0) / (delta_ / 2.0)) * (2.0 / delta_);
}

HDelta h_delta(double delta) { return HDelta(delta); }

// --------------------------------------------------------------- metric D

double d_metric(const FieldSeries& f, const FieldSeries& g, int kmax) {
  if (kmax < 1) throw std::invalid_argument("d_metric requires kmax >= 1");
  if (f.times != g.times || f.fields.size() != f.times.size() || g.fields.size() != g.times.size())
    throw GridMismatch("d_metric: time grids differ");
  if (f.times.empty()) return 0.0;
  for (std::size_t i = 1; i < f.times.size(); ++i)
    if (!(f.times[i] > f.times[i - 1])) throw std::invalid_argument("d_metric: times must increase");
  for (std::size_t i = 0; i < f.fields.size(); ++i)
    require_same_grid(f.fields[i].grid(), g.fields[i].grid(), "d_metric");

  // Trapezoidal weights; a single snapshot gets unit weight.
  const std::size_t nt = f.times.size();
  std::vector<double> w(nt, 0.0);
  if (nt == 1) {
    w[0] = 1.0;
  } else {
    for (std::size_t i = 0; i + 1 < nt; ++i) {
      const double half = 0.5 * (f.times[i + 1] - f.times[i]);
      w[i] += half;
      w[i + 1] += half;
    }
  }

  double total = 0.0;
  double weight = 1.0;
  for (int k = 1; k <= kmax; ++k) {
    weight *= 0.5;
    const HDelta h(1.0 / k);
    double r = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
      const auto& a = f.fields[t];
      const auto& b = g.fields[t];
      double sum = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(h(a[i]) - h(b[i]));
      r += w[t] * sum * a.grid().cell_volume();
    }
    total += weight * (r / (1.0 + r));
  }
  return total;
}

// --------------------------------------------------------- MollifierKappa

double standard_bump_mass() {
  static const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [](double t) { return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; }, -1.0, 1.0, 15, 1e-15);
  return mass;
}

MollifierKappa::MollifierKappa(int dim, double eps, double delta) : dim_(dim), eps_(eps), delta_(delta) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("kappa: dimension must be 1, 2 or 3");
  if (!(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("kappa requires eps, delta in (0, 1)");
}

double MollifierKappa::bump1(double t, double scale) const {
  const double u = t / scale;
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u)) / (standard_bump_mass() * scale);
}

double MollifierKappa::spatial(std::span<const double> z) const {
  double out = 1.0;
  for (int a = 0; a < dim_; ++a) {
    // Periodize: sum over the images z + m that can reach the support.
    const double base = z[a] - std::round(z[a]);
    double s = 0.0;
    for (int m = -1; m <= 1; ++m) s += bump1(base + m, eps_);
    out *= s;
  }
  return out;
}

double MollifierKappa::velocity(double z) const { return bump1(z, delta_); }

double MollifierKappa::operator()(std::span<const double> x, std::span<const double> y, double xi,
                                  double eta) const {
  std::array<double, 3> z{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) z[a] = x[a] - y[a];
  return spatial(std::span<const double>(z.data(), dim_)) * velocity(xi - eta);
}

MollifierKappa kappa(int dim, double eps, double delta) { return MollifierKappa(dim, eps, delta); }

}  // namespace dk
