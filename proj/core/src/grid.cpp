#include "dk/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dk/errors.hpp"
#include "fft.hpp"

namespace dk {

// ---------------------------------------------------------------- GridSpec

GridSpec::GridSpec(int dim, int n) : dim_(dim), n_(n) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  if (n < 4 || (n & (n - 1)) != 0)
    throw std::invalid_argument("points per axis must be a power of two >= 4, got " +
                                std::to_string(n));
  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(n);
}

std::array<int, 3> GridSpec::unflatten(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return idx;
}

std::size_t GridSpec::flatten(std::span<const int> indices) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * n_ + static_cast<std::size_t>(indices[a]);
  return flat;
}

std::size_t GridSpec::flat_of_wavevector(std::span<const int> k) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) {
    if (k[a] < -n_ / 2 || k[a] >= n_ / 2)
      throw std::out_of_range("wavevector component outside [-n/2, n/2)");
    flat = flat * n_ + static_cast<std::size_t>(index_of(k[a]));
  }
  return flat;
}

std::array<int, 3> GridSpec::wavevector(std::size_t flat) const {
  auto idx = unflatten(flat);
  for (int a = 0; a < dim_; ++a) idx[a] = wavenumber(idx[a]);
  return idx;
}

std::array<double, 3> GridSpec::point(std::size_t flat) const {
  const auto idx = unflatten(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = static_cast<double>(idx[a]) / n_;
  return x;
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw GridMismatch(std::string("grid mismatch in ") + what);
}

// --------------------------------------------------------------- RealField

RealField::RealField(const GridSpec& grid, double value)
    : grid_(grid), values_(grid.size(), value) {}

RealField::RealField(const GridSpec& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw std::invalid_argument("field length does not match grid size");
}

RealField RealField::from_function(const GridSpec& grid,
                                   const std::function<double(std::span<const double>)>& f) {
  RealField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto x = grid.point(i);
    out.values_[i] = f(std::span<const double>(x.data(), grid.dim()));
  }
  return out;
}

bool RealField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double RealField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double RealField::max() const { return *std::max_element(values_.begin(), values_.end()); }

RealField& RealField::operator+=(const RealField& other) {
  require_same_grid(grid_, other.grid_, "RealField +=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

RealField& RealField::operator-=(const RealField& other) {
  require_same_grid(grid_, other.grid_, "RealField -=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

RealField& RealField::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

RealField operator+(RealField a, const RealField& b) { return a += b; }
RealField operator-(RealField a, const RealField& b) { return a -= b; }
RealField operator*(double a, RealField f) { return f *= a; }

RealField hadamard(const RealField& a, const RealField& b) {
  require_same_grid(a.grid(), b.grid(), "hadamard");
  RealField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

// ----------------------------------------------------------- SpectralField

SpectralField::SpectralField(const GridSpec& grid, Complex value)
    : grid_(grid), coefficients_(grid.size(), value) {}

SpectralField::SpectralField(const GridSpec& grid, std::vector<Complex> coefficients)
    : grid_(grid), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != grid_.size())
    throw std::invalid_argument("coefficient count does not match grid size");
}

Complex SpectralField::at(std::span<const int> k) const {
  return coefficients_[grid_.flat_of_wavevector(k)];
}

Complex& SpectralField::at(std::span<const int> k) {
  return coefficients_[grid_.flat_of_wavevector(k)];
}

double SpectralField::conjugate_symmetry_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    auto idx = grid_.unflatten(i);
    bool nyquist = false;
    std::array<int, 3> neg{0, 0, 0};
    for (int a = 0; a < grid_.dim(); ++a) {
      nyquist = nyquist || grid_.is_nyquist(idx[a]);
      neg[a] = (grid_.n() - idx[a]) % grid_.n();
    }
    if (nyquist) continue;
    const Complex mirror = coefficients_[grid_.flatten(neg)];
    worst = std::max(worst, std::abs(coefficients_[i] - std::conj(mirror)));
  }
  return worst;
}

// ------------------------------------------------------------- VectorField

VectorField::VectorField(const GridSpec& grid, double value)
    : components(grid.dim(), RealField(grid, value)) {}

VectorField::VectorField(std::vector<RealField> comps) : components(std::move(comps)) {
  if (components.empty()) throw std::invalid_argument("vector field needs a component");
  for (const auto& c : components) require_same_grid(c.grid(), components.front().grid(), "VectorField");
}

RealField norm_squared(const VectorField& v) {
  RealField out(v.grid());
  for (const auto& c : v.components)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[i] * c[i];
  return out;
}

// -------------------------------------------------------------- transforms

SpectralField forward(const RealField& f) {
  const auto& grid = f.grid();
  std::vector<Complex> in(f.values().begin(), f.values().end());
  SpectralField out(grid);
  detail::fft(grid, -1, in, out.coefficients());
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (auto& c : out.coefficients()) c *= scale;
  return out;
}

RealField inverse(const SpectralField& f) {
  const auto& grid = f.grid();
  std::vector<Complex> out(grid.size());
  detail::fft(grid, +1, f.coefficients(), out);
  RealField r(grid);
  for (std::size_t i = 0; i < out.size(); ++i) r[i] = out[i].real();
  return r;
}

double integrate(const RealField& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return sum * f.grid().cell_volume();
}

double lp_norm(const RealField& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm requires p >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
  }
  double sum = 0.0;
  if (p == 1.0) {
    for (double v : f.values()) sum += std::abs(v);
    return sum * f.grid().cell_volume();
  }
  if (p == 2.0) {
    for (double v : f.values()) sum += v * v;
    return std::sqrt(sum * f.grid().cell_volume());
  }
  for (double v : f.values()) sum += std::pow(std::abs(v), p);
  return std::pow(sum * f.grid().cell_volume(), 1.0 / p);
}

double lp_norm(const VectorField& v, double p) {
  RealField mag = norm_squared(v);
  for (double& x : mag.values()) x = std::sqrt(x);
  return lp_norm(mag, p);
}

// ------------------------------------------------------ spectral operators

namespace {

// 2 pi k_a for a spectral index along one axis; zero on the Nyquist index.
double derivative_symbol(const GridSpec& grid, int index) {
  if (grid.is_nyquist(index)) return 0.0;
  return 2.0 * std::numbers::pi * grid.wavenumber(index);
}

}  // namespace

std::vector<SpectralField> spectral_gradient(const SpectralField& f) {
  const auto& grid = f.grid();
  std::vector<SpectralField> out(grid.dim(), SpectralField(grid));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto idx = grid.unflatten(i);
    for (int a = 0; a < grid.dim(); ++a)
      out[a][i] = Complex(0.0, derivative_symbol(grid, idx[a])) * f[i];
  }
  return out;
}

SpectralField spectral_divergence(std::span<const SpectralField> v) {
  if (v.empty()) throw std::invalid_argument("divergence of an empty vector field");
  const auto& grid = v.front().grid();
  if (static_cast<int>(v.size()) != grid.dim())
    throw GridMismatch("vector field component count differs from grid dimension");
  for (const auto& c : v) require_same_grid(c.grid(), grid, "spectral_divergence");
  SpectralField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto idx = grid.unflatten(i);
    Complex acc = 0.0;
    for (int a = 0; a < grid.dim(); ++a) acc += Complex(0.0, derivative_symbol(grid, idx[a])) * v[a][i];
    out[i] = acc;
  }
  return out;
}

SpectralField spectral_laplacian(const SpectralField& f) {
  const auto& grid = f.grid();
  SpectralField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto idx = grid.unflatten(i);
    Complex acc = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
      const Complex symbol(0.0, derivative_symbol(grid, idx[a]));
      acc += symbol * (symbol * f[i]);
    }
    out[i] = acc;
  }
  return out;
}

VectorField gradient(const RealField& f) {
  const auto grad = spectral_gradient(forward(f));
  std::vector<RealField> comps;
  comps.reserve(grad.size());
  for (const auto& g : grad) comps.push_back(inverse(g));
  return VectorField(std::move(comps));
}

RealField divergence(const VectorField& v) {
  std::vector<SpectralField> hat;
  hat.reserve(v.components.size());
  for (const auto& c : v.components) hat.push_back(forward(c));
  return inverse(spectral_divergence(hat));
}

RealField laplacian(const RealField& f) { return inverse(spectral_laplacian(forward(f))); }

RealField convolve(const SpectralField& kernel, const RealField& f) {
  require_same_grid(kernel.grid(), f.grid(), "convolve");
  SpectralField hat = forward(f);
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= kernel[i];
  return inverse(hat);
}

VectorField convolve(std::span<const SpectralField> kernel, const RealField& f) {
  if (kernel.empty()) throw std::invalid_argument("convolve with an empty vector kernel");
  const SpectralField hat = forward(f);
  std::vector<RealField> comps;
  comps.reserve(kernel.size());
  for (const auto& k : kernel) {
    require_same_grid(k.grid(), f.grid(), "convolve");
    SpectralField prod(f.grid());
    for (std::size_t i = 0; i < hat.size(); ++i) prod[i] = k[i] * hat[i];
    comps.push_back(inverse(prod));
  }
  return VectorField(std::move(comps));
}

bool in_dealiased_band(const GridSpec& grid, std::size_t flat) {
  const auto k = grid.wavevector(flat);
  const int cutoff = grid.dealias_cutoff();
  for (int a = 0; a < grid.dim(); ++a)
    if (std::abs(k[a]) > cutoff) return false;
  return true;
}

void dealias(SpectralField& f) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!in_dealiased_band(f.grid(), i)) f[i] = 0.0;
}

RealField dealiased(const RealField& f) {
  SpectralField hat = forward(f);
  dealias(hat);
  return inverse(hat);
}

}  // namespace dk
