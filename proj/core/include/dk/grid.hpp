#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace dk {

using Complex = std::complex<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Uniform periodic grid on the unit torus [0,1)^d.
///
/// Points are stored row-major with axis 0 slowest; point i_a along axis a
/// sits at x_a = i_a / n.  Spectral arrays use the same layout, with index
/// i_a mapped to the wavenumber i_a for i_a < n/2 and i_a - n otherwise.
class GridSpec {
 public:
  GridSpec() = default;
  /// Throws std::invalid_argument unless 1 <= dim <= 3, n >= 4, n a power of two.
  GridSpec(int dim, int n);

  int dim() const { return dim_; }
  int n() const { return n_; }
  std::size_t size() const { return size_; }
  double spacing() const { return 1.0 / n_; }
  /// Volume of one cell, h^d.
  double cell_volume() const { return 1.0 / static_cast<double>(size_); }

  /// Signed wavenumber for a per-axis index.
  int wavenumber(int index) const { return index < n_ / 2 ? index : index - n_; }
  /// Per-axis index for a signed wavenumber in [-n/2, n/2).
  int index_of(int wavenumber) const { return wavenumber >= 0 ? wavenumber : wavenumber + n_; }
  bool is_nyquist(int index) const { return index == n_ / 2; }

  /// Flat offset -> per-axis indices (only the first dim() entries are used).
  std::array<int, 3> unflatten(std::size_t flat) const;
  std::size_t flatten(std::span<const int> indices) const;
  /// Flat offset of a signed wavevector; components must lie in [-n/2, n/2).
  std::size_t flat_of_wavevector(std::span<const int> k) const;
  /// Signed wavevector at a flat spectral offset.
  std::array<int, 3> wavevector(std::size_t flat) const;
  /// Physical coordinates of the grid point at a flat offset.
  std::array<double, 3> point(std::size_t flat) const;

  /// Largest per-axis wavenumber kept by the two-thirds rule: floor(n/3).
  int dealias_cutoff() const { return n_ / 3; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int dim_ = 0;
  int n_ = 0;
  std::size_t size_ = 0;
};

/// Real scalar field sampled on a grid.
class RealField {
 public:
  RealField() = default;
  explicit RealField(const GridSpec& grid, double value = 0.0);
  RealField(const GridSpec& grid, std::vector<double> values);

  /// Samples f at every grid point; f receives the d coordinates.
  static RealField from_function(const GridSpec& grid,
                                 const std::function<double(std::span<const double>)>& f);

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  bool all_finite() const;
  double min() const;
  double max() const;

  RealField& operator+=(const RealField& other);
  RealField& operator-=(const RealField& other);
  RealField& operator*=(double a);

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

RealField operator+(RealField a, const RealField& b);
RealField operator-(RealField a, const RealField& b);
RealField operator*(double a, RealField f);
/// Pointwise product.
RealField hadamard(const RealField& a, const RealField& b);

/// Fourier coefficients c_k with f(x) = sum_k c_k exp(2 pi i k.x).
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const GridSpec& grid, Complex value = {});
  SpectralField(const GridSpec& grid, std::vector<Complex> coefficients);

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return coefficients_.size(); }
  std::span<const Complex> coefficients() const { return coefficients_; }
  std::span<Complex> coefficients() { return coefficients_; }
  Complex operator[](std::size_t i) const { return coefficients_[i]; }
  Complex& operator[](std::size_t i) { return coefficients_[i]; }

  Complex at(std::span<const int> wavevector) const;
  Complex& at(std::span<const int> wavevector);

  /// Largest |c_k - conj(c_{-k})| over the non-Nyquist wavevectors.
  double conjugate_symmetry_defect() const;

 private:
  GridSpec grid_;
  std::vector<Complex> coefficients_;
};

/// One RealField per axis, all on the same grid.
struct VectorField {
  std::vector<RealField> components;

  VectorField() = default;
  explicit VectorField(const GridSpec& grid, double value = 0.0);
  explicit VectorField(std::vector<RealField> comps);

  const GridSpec& grid() const { return components.front().grid(); }
  int dim() const { return static_cast<int>(components.size()); }
  RealField& operator[](int a) { return components[a]; }
  const RealField& operator[](int a) const { return components[a]; }
};

/// Pointwise Euclidean norm squared, |v|^2.
RealField norm_squared(const VectorField& v);

SpectralField forward(const RealField& f);
/// Real part of the inverse transform.
RealField inverse(const SpectralField& f);

double integrate(const RealField& f);
/// (int |f|^p)^(1/p); p = infinity gives max |f|.  Throws for p < 1.
double lp_norm(const RealField& f, double p);
double lp_norm(const VectorField& v, double p);

// Spectral derivatives multiply by 2 pi i k_a per axis; the Nyquist index is
// given derivative zero so that real fields stay real.
std::vector<SpectralField> spectral_gradient(const SpectralField& f);
SpectralField spectral_divergence(std::span<const SpectralField> v);
/// Identical arithmetic to spectral_divergence(spectral_gradient(f)).
SpectralField spectral_laplacian(const SpectralField& f);

VectorField gradient(const RealField& f);
RealField divergence(const VectorField& v);
RealField laplacian(const RealField& f);

/// Kernel-times-field in Fourier space followed by an inverse transform.
RealField convolve(const SpectralField& kernel, const RealField& f);
VectorField convolve(std::span<const SpectralField> kernel, const RealField& f);

/// Zeroes every coefficient with some |k_a| > n/3.
void dealias(SpectralField& f);
RealField dealiased(const RealField& f);
bool in_dealiased_band(const GridSpec& grid, std::size_t flat);

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

}  // namespace dk
