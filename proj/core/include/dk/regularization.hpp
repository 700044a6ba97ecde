#pragma once

#include <span>
#include <vector>

#include "dk/grid.hpp"

namespace dk {

/// Quintic smoothstep 6t^5 - 15t^4 + 10t^3 clamped to [0, 1]; C^2 at both ends.
double smoothstep5(double t);
/// Derivative of smoothstep5, 30 t^2 (1-t)^2 on (0, 1), zero outside.
double smoothstep5_derivative(double t);

/// Smooth approximation sigma_n of the square root with compactly supported
/// derivative:
///
///   sigma_n(xi) = int_0^xi g_n(s) ds,  g_n(s) = w_n(s) / (2 sqrt s),
///
/// where the weight w_n is 0 on [0, 1/n], rises by smoothstep on [1/n, 2/n],
/// is 1 on [2/n, n], falls by smoothstep on [n, 2n] and is 0 beyond.  Hence
/// sigma_n(xi) = sigma_n(2/n) + sqrt(xi) - sqrt(2/n) on [2/n, n] and
/// 0 <= sigma_n(xi) <= sqrt(xi) <= c sqrt(xi) with envelope c = 2.
class SigmaFamily {
 public:
  /// Throws std::invalid_argument for n < 2.
  explicit SigmaFamily(int n);

  int index() const { return n_; }
  double envelope() const { return 2.0; }

  double value(double xi) const;
  double derivative(double xi) const;
  double operator()(double xi) const { return value(xi); }

  /// sup over xi >= 0 of sigma_n'(xi)^2 (sampled on the lower blend).
  double max_derivative_squared() const { return max_derivative_squared_; }
  /// Support of sigma_n': [1/n, 2n].
  double support_lo() const { return 1.0 / n_; }
  double support_hi() const { return 2.0 * n_; }

 private:
  double blend_integral(double a, double b) const;

  int n_;
  double at_2_over_n_;  // sigma_n(2/n)
  double at_n_;         // sigma_n(n)
  double at_2n_;        // sigma_n(2n), the plateau
  double max_derivative_squared_;
};

SigmaFamily sigma(int n);

/// Piecewise-linear cutoff: 0 below beta/2, 1 above beta, slope 2/beta between.
class CutoffPhi {
 public:
  explicit CutoffPhi(double beta);
  double operator()(double xi) const;
  double derivative(double xi) const;
  double beta() const { return beta_; }

 private:
  double beta_;
};

/// Piecewise-linear cutoff: 1 below M, 0 above M+1, slope -1 between.
class CutoffZeta {
 public:
  explicit CutoffZeta(int M);
  double operator()(double xi) const;
  double derivative(double xi) const;
  int M() const { return M_; }

 private:
  int M_;
};

CutoffPhi phi_beta(double beta);
CutoffZeta zeta_M(int M);

/// h_delta(xi) = psi_delta(xi) xi with psi_delta the smoothstep on [delta/2, delta];
/// |psi_delta'| <= (30/8) / delta.
class HDelta {
 public:
  /// delta in (0, 1].
  explicit HDelta(double delta);
  double psi(double xi) const;
  double psi_derivative(double xi) const;
  double operator()(double xi) const { return psi(xi) * xi; }
  double derivative(double xi) const { return psi_derivative(xi) * xi + psi(xi); }
  double delta() const { return delta_; }

 private:
  double delta_;
};

HDelta h_delta(double delta);

/// Space-time field sampled at increasing times.
struct FieldSeries {
  std::vector<double> times;
  std::vector<RealField> fields;
};

/// Truncated metric sum_{k=1}^{kmax} 2^-k r_k / (1 + r_k) with
/// r_k = || h_{1/k}(f) - h_{1/k}(g) ||_{L^1(space-time)}; the time integral
/// uses the trapezoidal rule on the shared time grid.  Throws GridMismatch
/// when the time grids or spatial grids differ.
double d_metric(const FieldSeries& f, const FieldSeries& g, int kmax);

/// Product mollifier kappa^{eps,delta}(x, y, xi, eta) = k_eps(x - y) k_delta(xi - eta)
/// with k_eps a periodic tensor-product bump on the torus and k_delta a
/// bump supported in [-delta, delta], both of unit mass.
class MollifierKappa {
 public:
  MollifierKappa(int dim, double eps, double delta);

  double spatial(std::span<const double> z) const;
  double velocity(double z) const;
  double operator()(std::span<const double> x, std::span<const double> y, double xi, double eta) const;

  double eps() const { return eps_; }
  double delta() const { return delta_; }
  int dim() const { return dim_; }

 private:
  double bump1(double t, double scale) const;

  int dim_;
  double eps_;
  double delta_;
};

MollifierKappa kappa(int dim, double eps, double delta);

/// int_{-1}^{1} exp(-1 / (1 - t^2)) dt, the normalizer of the standard bump.
double standard_bump_mass();

}  // namespace dk
