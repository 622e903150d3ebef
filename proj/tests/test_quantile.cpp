#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "gvm/error.hpp"
#include "gvm/estimators.hpp"
#include "gvm/quantile.hpp"

using namespace gvm;

namespace {

SpectralEstimate grid_spectrum(std::vector<double> f, std::vector<double> p) {
  SpectralEstimate s;
  s.freqs = std::move(f);
  s.psd = std::move(p);
  s.total_mass = spectral_mass(s.freqs, s.psd);
  return s;
}

// Optimal cost between two uniform measures on n atoms each, by checking every matching.
double brute_force_cost(std::vector<double> x, const std::vector<double>& y, int power) {
  std::vector<int> perm(x.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) c += std::pow(std::abs(x[i] - y[perm[i]]), power);
    best = std::min(best, c / x.size());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST(Quantile, OneHotBinIsConstant) {
  std::vector<double> f, p;
  for (int i = 0; i <= 100; ++i) {
    f.push_back(i * 0.001);
    p.push_back(i == 50 ? 3.0 : 0.0);
  }
  const auto q = quantile_from_spectrum(grid_spectrum(f, p));
  for (double pr : uniform_probs(1000)) EXPECT_DOUBLE_EQ(q(pr), 0.05);
}

TEST(Quantile, UniformDensityWithinOneCell) {
  const double a = 0.1, b = 0.3;
  std::vector<double> f, p;
  for (int i = 0; i <= 200; ++i) {
    f.push_back(a + i * (b - a) / 200);
    p.push_back(1.0);
  }
  const auto q = quantile_from_spectrum(grid_spectrum(f, p));
  for (double pr : uniform_probs(1000)) EXPECT_NEAR(q(pr), a + pr * (b - a), (b - a) / 200 + 1e-12);
}

TEST(Quantile, TwoEqualBinsStepAtHalf) {
  const auto q = quantile_from_spectrum(grid_spectrum({0.02, 0.04}, {1.0, 1.0}));
  EXPECT_EQ(q(0.0), 0.02);
  EXPECT_EQ(q(0.25), 0.02);
  EXPECT_EQ(q(0.4999), 0.02);
  EXPECT_EQ(q(0.5), 0.02);  // left edge on ties
  EXPECT_EQ(q(0.5001), 0.04);
  EXPECT_EQ(q(1.0), 0.04);
  EXPECT_NEAR(q.mean(), 0.03, 1e-15);
}

TEST(Quantile, ZeroMassThrows) {
  EXPECT_THROW(quantile_from_spectrum(grid_spectrum({0.0, 0.1, 0.2}, {0.0, 0.0, 0.0})), DegenerateSpectrumError);
  EXPECT_THROW(QuantileTable::from_atoms(std::vector<double>{0.1}, std::vector<double>{-1.0}), DomainError);
}

TEST(Quantile, MonotoneOnRandomSpectra) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> f, p;
    for (int i = 0; i < 300; ++i) {
      f.push_back(i * 0.01);
      p.push_back(u(rng) < 0.3 ? 0.0 : u(rng));
    }
    const auto q = quantile_from_spectrum(grid_spectrum(f, p));
    const auto v = q.sample(uniform_probs(1000));
    EXPECT_TRUE(std::is_sorted(v.begin(), v.end()));
  }
}

TEST(Quantile, WassersteinMatchesBruteForceTransport) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + t % 8;
    std::vector<double> x(n), y(n), w(n, 1.0);
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng);
    const auto qx = QuantileTable::from_atoms(x, w);
    const auto qy = QuantileTable::from_atoms(y, w);
    EXPECT_NEAR(wasserstein2_squared(qx, qy), brute_force_cost(x, y, 2), 1e-12);
    EXPECT_NEAR(wasserstein1(qx, qy), brute_force_cost(x, y, 1), 1e-12);
  }
}

TEST(Quantile, UnequalWeightsAgainstHandComputedCoupling) {
  // mass 0.25 at 0 and 0.75 at 1 vs mass 1 at 0.5: every unit travels 0.5.
  const auto a = QuantileTable::from_atoms(std::vector<double>{0.0, 1.0}, std::vector<double>{1.0, 3.0});
  const auto b = QuantileTable::from_atoms(std::vector<double>{0.5}, std::vector<double>{7.0});
  EXPECT_NEAR(wasserstein1(a, b), 0.5, 1e-15);
  EXPECT_NEAR(wasserstein2_squared(a, b), 0.25, 1e-15);
}

TEST(Quantile, UniformProbsGrid) {
  const auto p = uniform_probs(1000);
  ASSERT_EQ(p.size(), 1000u);
  EXPECT_EQ(p.front(), 0.0);
  EXPECT_EQ(p.back(), 1.0);
  EXPECT_THROW(uniform_probs(1), DomainError);
}
