#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dk/errors.hpp"
#include "dk/regularization.hpp"

using namespace dk;

namespace {

// Composite Simpson rule, enough for smooth integrands on short intervals.
template <class F>
double simpson(F f, double a, double b, int panels = 2000) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

FieldSeries random_series(const GridSpec& g, int steps, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-0.2, 1.5);
  FieldSeries s;
  for (int k = 0; k < steps; ++k) {
    s.times.push_back(0.1 * k);
    RealField f(g);
    for (auto& v : f.values()) v = u(gen);
    s.fields.push_back(f);
  }
  return s;
}

const int kLadder[] = {4, 16, 64, 256};

}  // namespace

TEST(Smoothstep, EndpointsAndDerivative) {
  EXPECT_EQ(smoothstep5(-1.0), 0.0);
  EXPECT_EQ(smoothstep5(2.0), 1.0);
  EXPECT_DOUBLE_EQ(smoothstep5(0.5), 0.5);
  for (double t : {0.1, 0.4, 0.77}) {
    const double fd = (smoothstep5(t + 1e-6) - smoothstep5(t - 1e-6)) / 2e-6;
    EXPECT_NEAR(smoothstep5_derivative(t), fd, 1e-8);
  }
}

TEST(Sigma, VanishesAtZeroAndRejectsSmallIndex) {
  for (int n : kLadder) {
    EXPECT_EQ(sigma(n)(0.0), 0.0);
    EXPECT_EQ(sigma(n).derivative(0.5 / n), 0.0);
  }
  EXPECT_THROW(sigma(1), std::invalid_argument);
}

TEST(Sigma, EnvelopeBound) {
  for (int n : kLadder) {
    const auto s = sigma(n);
    for (int i = 1; i <= 20000; ++i) {
      const double xi = 4.0 * n * i / 20000.0;
      EXPECT_LE(s(xi), s.envelope() * std::sqrt(xi));
      EXPECT_GE(s(xi), 0.0);
    }
    double worst = 0.0;
    for (double xi = 1e-4; xi <= 1e3; xi *= 1.01) worst = std::max(worst, s(xi) / std::sqrt(xi));
    EXPECT_LE(worst, 2.0);
  }
}

TEST(Sigma, ExactSquareRootIncrementsOnPlateau) {
  for (int n : kLadder) {
    const auto s = sigma(n);
    const double a = 2.0 / n;
    for (double xi : {a, 1.0, 0.5 * n, static_cast<double>(n)}) {
      EXPECT_NEAR(s(xi) - s(a), std::sqrt(xi) - std::sqrt(a), 1e-8) << "n=" << n << " xi=" << xi;
      EXPECT_NEAR(s.derivative(xi), 0.5 / std::sqrt(xi), 1e-12);
    }
  }
}

TEST(Sigma, ValueIsIntegralOfDerivative) {
  const auto s = sigma(16);
  const double lo = 1.0 / 16;
  for (double xi : {0.07, 0.1, 0.125, 3.0, 20.0, 31.9, 40.0}) {
    // Split at the blend boundaries so each panel sees a smooth integrand.
    double q = 0.0, a = lo;
    for (double b : {2.0 / 16, 16.0, 32.0, xi}) {
      b = std::min(b, xi);
      if (b > a) q += simpson([&](double t) { return s.derivative(t); }, a, b, 20000);
      a = std::max(a, b);
    }
    EXPECT_NEAR(s(xi), q, 1e-8) << "xi=" << xi;
  }
  // The derivative is supported on [1/n, 2n].
  EXPECT_EQ(s.derivative(33.0), 0.0);
  EXPECT_EQ(s(40.0), s(100.0));
}

TEST(Sigma, MaxDerivativeSquaredDominatesSamples) {
  for (int n : kLadder) {
    const auto s = sigma(n);
    double m = 0.0;
    for (double xi = s.support_lo(); xi <= s.support_hi(); xi += 1e-4 / n) m = std::max(m, std::pow(s.derivative(xi), 2));
    EXPECT_GE(s.max_derivative_squared(), m * (1 - 1e-6));
    EXPECT_LE(s.max_derivative_squared(), m * (1 + 1e-3));
  }
}

TEST(Sigma, UniformBoundAwayFromZero) {
  // On [delta, 1e3]: sigma' <= 1/(2 sqrt xi) and sigma <= sqrt xi, so the
  // quantity is at most 1/(16 delta^2) + 1/4 for every n.
  const double delta = 0.1;
  const double bound = 1.0 / (16 * delta * delta) + 0.25;
  for (int n : kLadder) {
    const auto s = sigma(n);
    double m = 0.0;
    for (double xi = delta; xi <= 1e3; xi *= 1.001) {
      const double d = s.derivative(xi);
      m = std::max(m, std::pow(d, 4) + std::pow(s(xi) * d, 2));
    }
    EXPECT_LE(m, bound) << "n=" << n;
  }
}

TEST(Sigma, DerivativeConvergesToSquareRootDerivative) {
  std::vector<double> gaps;
  for (int n : kLadder) {
    const auto s = sigma(n);
    double gap = 0.0;
    for (double xi = 0.1; xi <= 10.0; xi += 1e-3) gap = std::max(gap, std::abs(s.derivative(xi) - 0.5 / std::sqrt(xi)));
    gaps.push_back(gap);
  }
  for (std::size_t i = 1; i < gaps.size(); ++i) EXPECT_LE(gaps[i], gaps[i - 1]);
  EXPECT_GT(gaps.front(), 0.0);
  EXPECT_EQ(gaps.back(), 0.0);
}

TEST(Cutoffs, PhiAndZetaExamples) {
  const double beta = 0.4;
  auto phi = phi_beta(beta);
  EXPECT_DOUBLE_EQ(phi(beta), 1.0);
  EXPECT_DOUBLE_EQ(phi(beta / 2), 0.0);
  EXPECT_DOUBLE_EQ(phi(0.75 * beta), 0.5);
  EXPECT_DOUBLE_EQ(phi.derivative(0.7 * beta), 2.0 / beta);
  EXPECT_THROW(phi_beta(1.0), std::invalid_argument);

  auto zeta = zeta_M(3);
  EXPECT_DOUBLE_EQ(zeta(3.0), 1.0);
  EXPECT_DOUBLE_EQ(zeta(4.0), 0.0);
  EXPECT_DOUBLE_EQ(zeta(3.5), 0.5);
  EXPECT_DOUBLE_EQ(zeta.derivative(3.5), -1.0);
  EXPECT_THROW(zeta_M(0), std::invalid_argument);
}

TEST(HDelta, RegionsAndBounds) {
  for (double delta : {0.5, 0.1, 0.01}) {
    auto h = h_delta(delta);
    EXPECT_DOUBLE_EQ(h(2 * delta), 2 * delta);
    EXPECT_EQ(h(delta / 4), 0.0);
    EXPECT_GE(h(0.75 * delta), 0.0);
    EXPECT_LE(h(0.75 * delta), 0.75 * delta);
    double dmax = 0.0, psimax = 0.0;
    for (double xi = 0.0; xi <= 2 * delta; xi += delta * 1e-4) {
      dmax = std::max(dmax, h.derivative(xi));
      psimax = std::max(psimax, std::abs(h.psi_derivative(xi)));
      EXPECT_LE(h(xi), xi + 1e-15);
    }
    // psi' <= 1.875 * 2 / delta, so h' <= 1.875 * 2 + 1 uniformly in delta.
    EXPECT_LE(psimax, 3.75 / delta * (1 + 1e-12));
    EXPECT_LE(dmax, 4.75);
  }
  EXPECT_THROW(h_delta(0.0), std::invalid_argument);
}

TEST(DMetric, AxiomsOnRandomTriples) {
  GridSpec g(1, 8);
  const int kmax = 12;
  for (unsigned s = 0; s < 20; ++s) {
    auto f = random_series(g, 4, 3 * s), h = random_series(g, 4, 3 * s + 1), k = random_series(g, 4, 3 * s + 2);
    EXPECT_EQ(d_metric(f, f, kmax), 0.0);
    EXPECT_EQ(d_metric(f, h, kmax), d_metric(h, f, kmax));
    EXPECT_LE(d_metric(f, k, kmax), d_metric(f, h, kmax) + d_metric(h, k, kmax) + 1e-15);
    EXPECT_LE(d_metric(f, h, kmax), 1.0 - std::ldexp(1.0, -kmax));
  }
}

TEST(DMetric, SingleTermByHand) {
  // One snapshot, kmax = 1: r = ||h_1(f) - h_1(g)||_1 and D = r / (2 (1 + r)).
  GridSpec g(1, 4);
  FieldSeries f{{0.0}, {RealField(g, 2.0)}};
  FieldSeries h{{0.0}, {RealField(g, 3.0)}};
  EXPECT_NEAR(d_metric(f, h, 1), 0.5 * 1.0 / 2.0, 1e-15);
  FieldSeries shifted{{0.5}, {RealField(g, 3.0)}};
  EXPECT_THROW(d_metric(f, shifted, 1), GridMismatch);
}

TEST(Kappa, NormalizationAndSupport) {
  auto k = kappa(2, 0.2, 0.1);
  const double vel = simpson([&](double z) { return k.velocity(z); }, -0.1, 0.1, 4000);
  EXPECT_NEAR(vel, 1.0, 1e-6);
  EXPECT_EQ(k.velocity(0.1001), 0.0);
  EXPECT_EQ(k.velocity(-0.2), 0.0);

  // Tensor quadrature in y over the torus (uniform rule, exact up to the
  // bump's smoothness) and Simpson in eta.
  const int n = 256;
  double space = 0.0;
  const double x[] = {0.3, 0.95};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double z[] = {x[0] - (i + 0.5) / n, x[1] - (j + 0.5) / n};
      space += k.spatial(z);
    }
  space /= double(n) * n;
  EXPECT_NEAR(space, 1.0, 1e-6);
  const double y[] = {0.3, 0.95};
  EXPECT_GT(k(x, y, 0.5, 0.5), 0.0);
  EXPECT_NEAR(k(x, y, 0.5, 0.5), k.spatial(std::span<const double>(std::array<double, 2>{0.0, 0.0})) * k.velocity(0.0), 1e-12);
  EXPECT_NEAR(standard_bump_mass(), 0.443993816168079, 1e-12);
}
