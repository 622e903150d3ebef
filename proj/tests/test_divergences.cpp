#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gvm/divergences.hpp"
#include "gvm/error.hpp"
#include "gvm/estimators.hpp"
#include "gvm/kernels.hpp"

using namespace gvm;

namespace {

const Metric kAll[] = {Metric::L1, Metric::L2, Metric::W1, Metric::W2, Metric::KL, Metric::IS};

std::vector<double> random_positive(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(Divergences, ParseAndPrint) {
  EXPECT_EQ(parse_divergence("time:l1"), (DivergenceId{Domain::Temporal, Metric::L1}));
  EXPECT_EQ(parse_divergence("freq:w2"), (DivergenceId{Domain::Spectral, Metric::W2}));
  EXPECT_EQ(to_string(DivergenceId{Domain::Spectral, Metric::KL}), "freq:kl");
  EXPECT_THROW(parse_divergence("time:w2"), SchemaError);
  EXPECT_THROW(parse_divergence("freq:l3"), SchemaError);
  EXPECT_THROW(parse_divergence("w2"), SchemaError);
  for (auto m : kAll) {
    const DivergenceId id{Domain::Spectral, m};
    EXPECT_EQ(parse_divergence(to_string(id)), id);
  }
}

TEST(Divergences, IdentityGivesZero) {
  std::mt19937_64 rng(1);
  const auto grid = linear_grid(0.0, 1.0, 200);
  const auto a = random_positive(rng, 200);
  for (auto m : kAll) EXPECT_NEAR(divergence(m, grid, a, a), 0.0, 1e-14) << static_cast<int>(m);
}

TEST(Divergences, GaussianW2IsSquaredShift) {
  const auto grid = linear_grid(0.0, 0.5, 20001);
  const KernelModel m1(KernelFamily{FamilyId::ExpCos, 1}, {{1.0, 0.10, 0.01}});
  const KernelModel m2(KernelFamily{FamilyId::ExpCos, 1}, {{3.0, 0.15, 0.01}});
  const auto a = eval_psd(m1, grid);
  const auto b = eval_psd(m2, grid);
  EXPECT_NEAR(divergence(Metric::W2, grid, a, b), 0.05 * 0.05, 1e-7);
  EXPECT_NEAR(divergence(Metric::W1, grid, a, b), 0.05, 1e-5);
}

TEST(Divergences, RectL2IsWidth) {
  const double w = 0.2;
  const auto grid = linear_grid(0.0, 1.0, 100001);
  std::vector<double> a(grid.size()), b(grid.size()), zero(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    a[i] = grid[i] >= 0.1 && grid[i] <= 0.1 + w ? 1.0 : 0.0;
    b[i] = grid[i] >= 0.6 && grid[i] <= 0.6 + w ? 1.0 : 0.0;
  }
  EXPECT_NEAR(divergence(Metric::L2, grid, a, zero), w, 1e-4);
  EXPECT_NEAR(divergence(Metric::L2, grid, a, b), 2 * w, 1e-4);
  EXPECT_NEAR(divergence(Metric::L1, grid, a, b), 2 * w, 1e-4);
}

TEST(Divergences, MetricAxiomsOnRandomInputs) {
  std::mt19937_64 rng(3);
  const auto grid = linear_grid(0.0, 2.0, 64);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_positive(rng, 64);
    const auto b = random_positive(rng, 64);
    const auto c = random_positive(rng, 64);
    for (auto m : {Metric::L1, Metric::L2, Metric::W1, Metric::W2}) {
      const double ab = divergence(m, grid, a, b);
      EXPECT_GE(ab, 0.0);
      EXPECT_NEAR(ab, divergence(m, grid, b, a), 1e-12 * (1 + ab));
      // L2 and W2 are squared distances.
      auto d = [&](auto& x, auto& y) {
        const double v = divergence(m, grid, x, y);
        return m == Metric::L2 || m == Metric::W2 ? std::sqrt(v) : v;
      };
      EXPECT_LE(d(a, c), d(a, b) + d(b, c) + 1e-12);
    }
    for (auto m : {Metric::KL, Metric::IS}) EXPECT_GE(divergence(m, grid, a, b), -1e-14);
  }
}

TEST(Divergences, KlAndIsOnScaledCopies) {
  std::mt19937_64 rng(8);
  const auto grid = linear_grid(0.0, 1.0, 101);
  const auto a = random_positive(rng, 101);
  const double mass = trapezoid(grid, a);
  for (double c : {0.25, 0.5, 2.0, 4.0}) {
    std::vector<double> b(a);
    for (auto& x : b) x *= c;
    EXPECT_NEAR(divergence(Metric::KL, grid, a, b), mass * (-std::log(c) - 1 + c), 1e-12);
    EXPECT_NEAR(divergence(Metric::IS, grid, a, b), (1 / c + std::log(c) - 1), 1e-12);
  }
}

TEST(Divergences, KlAndIsGrowAwayFromTruth) {
  std::mt19937_64 rng(9);
  const auto grid = linear_grid(0.0, 1.0, 101);
  const auto a = random_positive(rng, 101);
  for (auto m : {Metric::KL, Metric::IS}) {
    double prev = 0.0;
    for (double c : {1.1, 1.5, 2.0, 4.0, 8.0}) {
      std::vector<double> b(a);
      for (auto& x : b) x *= c;
      const double d = divergence(m, grid, a, b);
      EXPECT_GT(d, prev);
      prev = d;
    }
  }
}

TEST(Divergences, SupportViolation) {
  const auto grid = linear_grid(0.0, 1.0, 5);
  const std::vector<double> a{1, 1, 1, 1, 1};
  const std::vector<double> b{1, 1, 0, 1, 1};
  DivergenceOptions strict;
  strict.floor_rel = 0.0;
  EXPECT_THROW(divergence(Metric::KL, grid, a, b, strict), DomainError);
  EXPECT_THROW(divergence(Metric::IS, grid, a, b, strict), DomainError);
  EXPECT_TRUE(std::isfinite(divergence(Metric::KL, grid, a, b)));
  EXPECT_TRUE(std::isfinite(divergence(Metric::IS, grid, a, b)));
}

TEST(Divergences, WassersteinIgnoresNormalization) {
  std::mt19937_64 rng(12);
  const auto grid = linear_grid(0.0, 1.0, 80);
  const auto a = random_positive(rng, 80);
  const auto b = random_positive(rng, 80);
  std::vector<double> b5(b);
  for (auto& x : b5) x *= 5.0;
  for (auto m : {Metric::W1, Metric::W2}) {
    EXPECT_NEAR(divergence(m, grid, a, b), divergence(m, grid, a, b5), 1e-14);
  }
}

TEST(Divergences, L2IsConvexInTheModel) {
  std::mt19937_64 rng(13);
  const auto grid = linear_grid(0.0, 1.0, 50);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_positive(rng, 50);
    const auto b1 = random_positive(rng, 50);
    const auto b2 = random_positive(rng, 50);
    for (double lam : {0.2, 0.5, 0.8}) {
      std::vector<double> mix(50);
      for (std::size_t i = 0; i < 50; ++i) mix[i] = lam * b1[i] + (1 - lam) * b2[i];
      EXPECT_LE(divergence(Metric::L2, grid, a, mix),
                lam * divergence(Metric::L2, grid, a, b1) + (1 - lam) * divergence(Metric::L2, grid, a, b2) + 1e-12);
    }
  }
}

TEST(Divergences, TemporalResidualCarriesNoiseAtLagZero) {
  const KernelModel m(KernelFamily{FamilyId::ExpCos, 1}, {{1.0, 0.02, 0.01}}, 0.5);
  EmpiricalCovariance cov;
  for (int k = 0; k < 20; ++k) {
    cov.lag_centers.push_back(k);
    cov.estimates.push_back(eval_kernel(m.with_noise(0.0), static_cast<double>(k)));
    cov.counts.push_back(1);
  }
  const auto r = temporal_residuals(m, cov);
  EXPECT_NEAR(r[0], 0.5, 1e-14);
  for (std::size_t k = 1; k < r.size(); ++k) EXPECT_NEAR(r[k], 0.0, 1e-14);
  EXPECT_NEAR(temporal_loss(m, cov, Metric::L1), 0.25, 1e-14);
  EXPECT_NEAR(temporal_loss(m.with_noise(0.0), cov, Metric::L2), 0.0, 1e-20);
  EXPECT_THROW(temporal_loss(m, cov, Metric::W2), DomainError);
}

TEST(Divergences, SpectralLossOrientation) {
  const KernelModel m(KernelFamily{FamilyId::ExpCos, 1}, {{1.0, 0.1, 0.02}});
  SpectralEstimate s;
  s.freqs = linear_grid(0.0, 0.5, 300);
  std::mt19937_64 rng(4);
  s.psd = random_positive(rng, 300);
  const auto b = eval_psd(m, s.freqs);
  const DivergenceId kl{Domain::Spectral, Metric::KL};
  EXPECT_DOUBLE_EQ(spectral_loss(m, s, kl), divergence(Metric::KL, s.freqs, s.psd, b));
  EXPECT_NE(spectral_loss(m, s, kl), divergence(Metric::KL, s.freqs, b, s.psd));
}
