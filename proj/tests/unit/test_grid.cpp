#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dk/grid.hpp"

using namespace dk;

namespace {

constexpr double kPi = std::numbers::pi;

RealField random_field(const GridSpec& g, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RealField f(g);
  for (auto& v : f.values()) v = u(gen);
  return f;
}

// Smooth periodic field with a handful of low modes.
RealField smooth_field(const GridSpec& g) {
  return RealField::from_function(g, [&](std::span<const double> x) {
    double s = 0.3;
    for (int a = 0; a < g.dim(); ++a) s += std::sin(2 * kPi * x[a] + 0.3 * a) + 0.5 * std::cos(4 * kPi * x[a]);
    if (g.dim() == 2) s += 0.7 * std::sin(2 * kPi * (x[0] + 2 * x[1]));
    return s;
  });
}

// O(N^2) discrete Fourier transform with the forward normalization 1/N.
std::vector<Complex> direct_dft(const RealField& f) {
  const GridSpec& g = f.grid();
  std::vector<Complex> out(g.size());
  for (std::size_t m = 0; m < g.size(); ++m) {
    const auto k = g.wavevector(m);
    Complex acc{};
    for (std::size_t j = 0; j < g.size(); ++j) {
      const auto x = g.point(j);
      double phase = 0.0;
      for (int a = 0; a < g.dim(); ++a) phase += k[a] * x[a];
      acc += f[j] * std::exp(Complex(0.0, -2 * kPi * phase));
    }
    out[m] = acc / static_cast<double>(g.size());
  }
  return out;
}

double max_abs_diff(const RealField& a, const RealField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(GridSpec, RejectsBadShapes) {
  EXPECT_THROW(GridSpec(2, 6), std::invalid_argument);
  EXPECT_THROW(GridSpec(2, 2), std::invalid_argument);
  EXPECT_THROW(GridSpec(0, 8), std::invalid_argument);
  EXPECT_NO_THROW(GridSpec(1, 4));
}

TEST(GridSpec, IndexRoundTrip) {
  GridSpec g(2, 8);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto k = g.wavevector(i);
    EXPECT_EQ(g.flat_of_wavevector(std::span<const int>(k.data(), 2)), i);
    const auto idx = g.unflatten(i);
    EXPECT_EQ(g.flatten(std::span<const int>(idx.data(), 2)), i);
  }
  EXPECT_EQ(g.wavenumber(5), -3);
  EXPECT_EQ(g.index_of(-3), 5);
}

TEST(Integrate, ConstantAndMeanZeroMode) {
  GridSpec g(2, 16);
  EXPECT_DOUBLE_EQ(integrate(RealField(g, 1.0)), 1.0);
  auto s = RealField::from_function(g, [](std::span<const double> x) { return std::sin(2 * kPi * x[0]); });
  EXPECT_NEAR(integrate(s), 0.0, 1e-15);
}

TEST(Integrate, MatchesDirectSum) {
  GridSpec g(2, 8);
  auto f = random_field(g, 11);
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) sum += f[i];
  EXPECT_NEAR(integrate(f), sum / 64.0, 1e-14);
}

TEST(LpNorm, Examples) {
  GridSpec g(1, 32);
  for (double p : {1.0, 2.0, 3.5, kInfinity}) EXPECT_NEAR(lp_norm(RealField(g, -1.7), p), 1.7, 1e-14);
  auto s = RealField::from_function(g, [](std::span<const double> x) { return std::sin(2 * kPi * x[0]); });
  EXPECT_NEAR(lp_norm(s, 2.0), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_THROW(lp_norm(s, 0.5), std::invalid_argument);

  GridSpec g2(2, 8);
  auto f = random_field(g2, 3);
  double acc = 0.0;
  for (std::size_t i = 0; i < g2.size(); ++i) acc += std::pow(std::abs(f[i]), 3.0);
  EXPECT_NEAR(lp_norm(f, 3.0), std::cbrt(acc / 64.0), 1e-14);
}

TEST(Transform, MatchesDirectDft) {
  for (int d : {1, 2}) {
    GridSpec g(d, 8);
    auto f = random_field(g, 5 + d);
    auto fast = forward(f);
    auto slow = direct_dft(f);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_LT(std::abs(fast[i] - slow[i]), 1e-14);
  }
}

TEST(Transform, RoundTripAndParseval) {
  for (int d : {1, 2}) {
    GridSpec g(d, 16);
    auto f = random_field(g, 17 + d);
    auto fh = forward(f);
    EXPECT_LT(max_abs_diff(inverse(fh), f), 1e-12);
    double energy = 0.0;
    for (auto c : fh.coefficients()) energy += std::norm(c);
    const double l2 = lp_norm(f, 2.0);
    EXPECT_NEAR(l2 * l2, energy, 1e-12);
    EXPECT_LT(fh.conjugate_symmetry_defect(), 1e-14);
  }
}

TEST(Gradient, ConstantAndSine) {
  GridSpec g(2, 16);
  auto zero = gradient(RealField(g, 3.0));
  EXPECT_LT(lp_norm(zero, kInfinity), 1e-14);
  auto s = RealField::from_function(g, [](std::span<const double> x) { return std::sin(2 * kPi * x[0]); });
  auto grad = gradient(s);
  auto expected = RealField::from_function(g, [](std::span<const double> x) { return 2 * kPi * std::cos(2 * kPi * x[0]); });
  EXPECT_LT(max_abs_diff(grad[0], expected), 1e-12);
  EXPECT_LT(lp_norm(grad[1], kInfinity), 1e-12);
}

TEST(Gradient, AgreesWithCenteredDifferences) {
  // Centered differences carry an O(h^2) error; halving h must shrink the
  // discrepancy by about 4.
  std::vector<double> errors;
  for (int n : {32, 64}) {
    GridSpec g(2, n);
    auto f = smooth_field(g);
    auto grad = gradient(f);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto idx = g.unflatten(i);
      for (int a = 0; a < 2; ++a) {
        auto up = idx, dn = idx;
        up[a] = (idx[a] + 1) % n;
        dn[a] = (idx[a] + n - 1) % n;
        const double fd = (f[g.flatten(std::span<const int>(up.data(), 2))] -
                           f[g.flatten(std::span<const int>(dn.data(), 2))]) * n / 2.0;
        err = std::max(err, std::abs(fd - grad[a][i]));
      }
    }
    errors.push_back(err);
  }
  EXPECT_LT(errors[0], 2.0);
  EXPECT_NEAR(errors[0] / errors[1], 4.0, 0.2);
}

TEST(Divergence, EigenfunctionAndConstant) {
  GridSpec g(2, 16);
  auto s = RealField::from_function(g, [](std::span<const double> x) { return std::sin(2 * kPi * x[0]); });
  auto lap = divergence(gradient(s));
  EXPECT_LT(max_abs_diff(lap, -4 * kPi * kPi * s), 1e-10);
  EXPECT_LT(lp_norm(divergence(VectorField(g, 2.5)), kInfinity), 1e-14);
}

TEST(Divergence, AgreesWithCenteredDifferences) {
  GridSpec g(2, 64);
  auto f = smooth_field(g);
  VectorField v(std::vector<RealField>{f, RealField::from_function(g, [](std::span<const double> x) {
                                         return std::cos(2 * kPi * (x[0] - x[1]));
                                       })});
  auto div = divergence(v);
  const int n = g.n();
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto idx = g.unflatten(i);
    double fd = 0.0;
    for (int a = 0; a < 2; ++a) {
      auto up = idx, dn = idx;
      up[a] = (idx[a] + 1) % n;
      dn[a] = (idx[a] + n - 1) % n;
      fd += (v[a][g.flatten(std::span<const int>(up.data(), 2))] - v[a][g.flatten(std::span<const int>(dn.data(), 2))]) *
            n / 2.0;
    }
    err = std::max(err, std::abs(fd - div[i]));
  }
  // h^2/6 * |f'''| with |f'''| <= (2 pi)^3 * ~8.
  EXPECT_LT(err, 8 * std::pow(2 * kPi, 3) / (6.0 * n * n));
}

TEST(Laplacian, BitwiseEqualsDivergenceOfGradient) {
  GridSpec g(2, 16);
  auto fh = forward(random_field(g, 23));
  auto lap = spectral_laplacian(fh);
  auto grad = spectral_gradient(fh);
  auto div = spectral_divergence(grad);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(lap[i].real(), div[i].real());
    EXPECT_EQ(lap[i].imag(), div[i].imag());
  }
}

TEST(Convolve, IdentityAndMeanZeroKernel) {
  GridSpec g(2, 8);
  auto f = random_field(g, 29);
  EXPECT_LT(max_abs_diff(convolve(SpectralField(g, Complex(1.0, 0.0)), f), f), 1e-14);
  SpectralField k(g, Complex(0.3, 0.0));
  k[0] = 0.0;
  EXPECT_LT(lp_norm(convolve(k, RealField(g, 4.0)), kInfinity), 1e-14);
}

TEST(Convolve, MatchesDirectPeriodicSum) {
  // (K * f)(x_i) = h sum_j K(x_i - x_j) f(x_j) for a kernel sampled on the grid.
  GridSpec g(1, 8);
  auto kphys = random_field(g, 31);
  auto f = random_field(g, 37);
  auto conv = convolve(forward(kphys), f);
  for (int i = 0; i < 8; ++i) {
    double s = 0.0;
    for (int j = 0; j < 8; ++j) s += kphys[(i - j + 8) % 8] * f[j] / 8.0;
    EXPECT_NEAR(conv[i], s, 1e-12);
  }
}

TEST(Convolve, Bilinear) {
  GridSpec g(2, 16);
  auto k = forward(random_field(g, 41));
  auto f = random_field(g, 43), h = random_field(g, 47);
  auto lhs = convolve(k, 0.7 * f + (-1.3) * h);
  auto rhs = 0.7 * convolve(k, f) + (-1.3) * convolve(k, h);
  EXPECT_LT(max_abs_diff(lhs, rhs), 1e-12);
  EXPECT_THROW(convolve(forward(random_field(GridSpec(2, 8), 1)), f), std::invalid_argument);
}

TEST(Dealias, RemovesHighModesOnly) {
  GridSpec g(1, 16);
  auto f = RealField::from_function(g, [](std::span<const double> x) {
    return std::cos(2 * kPi * 3 * x[0]) + std::cos(2 * kPi * 7 * x[0]);
  });
  auto low = RealField::from_function(g, [](std::span<const double> x) { return std::cos(2 * kPi * 3 * x[0]); });
  EXPECT_LT(max_abs_diff(dealiased(f), low), 1e-13);
}
