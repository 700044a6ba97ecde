#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dk/grid.hpp"

namespace dk {

/// Declared space-time integrability of V (exponents p, p*) and of div V (q, q*).
struct IntegrabilityClass {
  double p = kInfinity;
  double pstar = kInfinity;
  double q = kInfinity;
  double qstar = kInfinity;
};

/// Vector interaction kernel given by its Fourier coefficients, one
/// SpectralField per axis.
struct KernelSpec {
  GridSpec grid;
  std::vector<SpectralField> components;
  std::optional<IntegrabilityClass> exponents;
  std::string label;

  int dim() const { return grid.dim(); }
  /// Throws if a component is on another grid, the count is not d, or
  /// conjugate symmetry fails by more than tol.
  void validate(double tol = 1e-12) const;
  bool is_zero() const;
};

/// Outcome of the integrability audit.  The left-hand values are
/// d/p + 2/p* and d/(2q) + 1/q*, with 1/inf taken as 0.
struct LpsReport {
  bool a1_pass = false;
  bool a2_pass = false;
  double a1_lhs = 0.0;
  bool a1_pstar_in_range = false;  // 2 <= p* <= inf
  bool a1_p_in_range = false;      // d < p <= inf
  double a2_lhs = 0.0;
  bool a2_qstar_in_range = false;  // 1 <= q* <= inf
  bool a2_q_in_range = false;      // d/2 < q <= inf

  /// "A1 pass, A2 fail" style one-liner.
  std::string summary() const;
};

LpsReport check_lps(int d, double p, double pstar, double q, double qstar);
LpsReport check_lps(int d, const IntegrabilityClass& e);

/// Truncated periodic Biot-Savart kernel on a 2-d grid: coefficient
/// i k^perp / (2 pi |k|^2) for 0 < |k|_inf <= truncation, zero elsewhere.
/// The truncation defaults to the dealiased band n/3.  Declared exponents
/// are p = 3/2, p* = inf (V is in L^p only for p < 2) and q = q* = inf
/// (div V = 0).
KernelSpec biot_savart(const GridSpec& grid, std::optional<int> truncation = std::nullopt);

/// V(x) = amplitude * direction * sin(2 pi k.x): a smooth kernel living on
/// the pair of wavevectors +-k.
KernelSpec sine_kernel(const GridSpec& grid, std::span<const int> wavevector,
                       std::span<const double> direction, double amplitude = 1.0);

KernelSpec zero_kernel(const GridSpec& grid);

/// Fourier multiplier of the periodic heat-kernel mollifier of scale gamma,
/// exp(-gamma^2 4 pi^2 |k|^2 / 2).
double mollifier_multiplier(std::span<const int> wavevector, double gamma);

/// V_gamma = V * eta_gamma.  Throws for gamma <= 0.
KernelSpec mollify(const KernelSpec& v, double gamma);

/// Component-wise spectral convolution V * rho.
VectorField apply(const KernelSpec& v, const RealField& rho);

/// Scalar kernel with coefficients 2 pi i k . V(k).
SpectralField divergence_of(const KernelSpec& v);

/// V sampled on the grid.
VectorField physical(const KernelSpec& v);

/// Direct evaluation of V at an arbitrary point from its mode sum.
std::vector<double> evaluate_at(const KernelSpec& v, std::span<const double> x);

/// Time-dependent kernel as a right-continuous piecewise-constant schedule.
class KernelSchedule {
 public:
  KernelSchedule() = default;
  explicit KernelSchedule(KernelSpec constant);
  /// Entries must have strictly increasing times; the first entry applies
  /// for all earlier t as well.
  explicit KernelSchedule(std::vector<std::pair<double, KernelSpec>> entries);

  const KernelSpec& at(double t) const;
  std::span<const std::pair<double, KernelSpec>> entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  KernelSchedule mollified(double gamma) const;

 private:
  std::vector<std::pair<double, KernelSpec>> entries_;
};

/// Plain-text table: one line per nonzero wavevector,
/// "k_1 .. k_d re_1 im_1 .. re_d im_d".  Lines starting with '#' are
/// comments; "# exponents p pstar q qstar" carries the declared class
/// ("inf" allowed).
void write_kernel_table(std::ostream& out, const KernelSpec& v);
KernelSpec read_kernel_table(std::istream& in, const GridSpec& grid);

}  // namespace dk
