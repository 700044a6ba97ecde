#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dk/solver.hpp"

namespace dk {

std::vector<GalerkinMode> galerkin_basis(const GridSpec& grid, int count) {
  if (count < 1) throw std::invalid_argument("galerkin_basis needs count >= 1");
  std::vector<GalerkinMode> out{GalerkinMode{}};
  for (const auto& k : uv_wavevectors(grid.dim(), grid.dealias_cutoff())) {
    if (static_cast<int>(out.size()) >= count) break;
    bool inside = true;
    for (int a = 0; a < grid.dim(); ++a) inside = inside && std::abs(k[a]) <= grid.dealias_cutoff();
    if (!inside) continue;
    out.push_back({GalerkinMode::cosine, k});
    if (static_cast<int>(out.size()) < count) out.push_back({GalerkinMode::sine, k});
  }
  if (static_cast<int>(out.size()) < count)
    throw std::out_of_range("galerkin band of " + std::to_string(count) + " modes exceeds the dealiased band");
  return out;
}

RealField basis_function(const GridSpec& grid, const GalerkinMode& mode) {
  if (mode.kind == GalerkinMode::constant) return RealField(grid, 1.0);
  const auto k = mode.k;
  return RealField::from_function(grid, [&](std::span<const double> x) {
    double phase = 0.0;
    for (int a = 0; a < grid.dim(); ++a) phase += k[a] * x[a];
    phase -= std::floor(phase);
    const double theta = 2.0 * std::numbers::pi * phase;
    return std::numbers::sqrt2 * (mode.kind == GalerkinMode::cosine ? std::cos(theta) : std::sin(theta));
  });
}

double galerkin_coefficient(int i, int j, int k, const KernelSpec& v, int band) {
  if (i < 0 || j < 0 || k < 0 || i >= band || j >= band || k >= band)
    throw std::out_of_range("galerkin index outside the band");
  const GridSpec& grid = v.grid;
  const auto basis = galerkin_basis(grid, band);
  const RealField ei = basis_function(grid, basis[i]);
  const RealField ej = basis_function(grid, basis[j]);
  const RealField ek = basis_function(grid, basis[k]);
  const VectorField w = apply(v, ej);
  const VectorField grad = gradient(ek);
  double sum = 0.0;
  for (std::size_t x = 0; x < grid.size(); ++x) {
    double dot = 0.0;
    for (int a = 0; a < grid.dim(); ++a) dot += w[a][x] * grad[a][x];
    sum += ei[x] * dot;
  }
  return sum * grid.cell_volume();
}

}  // namespace dk
