#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gvm/error.hpp"
#include "gvm/kernels.hpp"

using namespace gvm;

namespace {

constexpr double kPi = std::numbers::pi;

KernelModel single(FamilyId id, double a, double mu, double s, double noise = 0.0) {
  return KernelModel(KernelFamily{id, 1}, {Component{a, mu, s}}, noise);
}

// Composite Simpson rule on [lo, hi] with an even number of panels.
template <class F>
double simpson(F f, double lo, double hi, int panels) {
  const double h = (hi - lo) / panels;
  double s = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST(Kernels, ExpCosAtZeroLagIsSqrtPi) {
  EXPECT_NEAR(eval_kernel(single(FamilyId::ExpCos, 1, 0, 1), 0.0), std::sqrt(kPi), 1e-12);
}

TEST(Kernels, SincAtZeroLagIsScale) {
  for (double s : {0.01, 0.3, 2.0}) EXPECT_NEAR(eval_kernel(single(FamilyId::Sinc, 1, 0.07, s), 0.0), s, 1e-14);
}

TEST(Kernels, ExpCosMatchesNumericInverseFourier) {
  const double mu = 0.05, sg = 0.01, tau = 10.0;
  // Two-sided density 1/2 [S(xi) + S(-xi)] with S(xi) = exp(-((xi - mu)/sg)^2).
  auto s2 = [&](double xi) {
    const double a = (xi - mu) / sg, b = (xi + mu) / sg;
    return 0.5 * (std::exp(-a * a) + std::exp(-b * b));
  };
  const double oracle = simpson([&](double xi) { return s2(xi) * std::cos(2 * kPi * xi * tau); }, -0.2, 0.2, 40000);
  EXPECT_NEAR(eval_kernel(single(FamilyId::ExpCos, 1, mu, sg), tau), oracle, 1e-10);
}

TEST(Kernels, PsdPointValues) {
  const double xi1[] = {0.05};
  EXPECT_NEAR(eval_psd(single(FamilyId::ExpCos, 1, 0.05, 0.01), xi1)[0], 1.0, 1e-12);
  const double xi2[] = {0.06};
  EXPECT_EQ(eval_psd(single(FamilyId::Sinc, 1, 0.05, 0.01), xi2)[0], 0.0);
}

TEST(Kernels, SquareExpPsdMassIsScaleTimesSqrtPi) {
  const auto m = single(FamilyId::ExpCos, 1, 0.05, 0.01);
  const double mass = simpson(
      [&](double xi) {
        const double x[] = {xi};
        return eval_psd(m, x)[0];
      },
      0.0, 0.5, 20000);
  EXPECT_NEAR(mass, 0.01 * std::sqrt(kPi), 1e-10);
}

TEST(Kernels, PrototypeQuantiles) {
  EXPECT_DOUBLE_EQ(quantile_of_prototype(Prototype::Rect, 0.75), 0.25);
  EXPECT_NEAR(quantile_of_prototype(Prototype::Gaussian, 0.5), 0.0, 1e-15);
  EXPECT_EQ(quantile_of_prototype(Prototype::Dirac, 0.3), 0.0);
  EXPECT_TRUE(std::isinf(quantile_of_prototype(Prototype::Gaussian, 0.0)));
  EXPECT_THROW(quantile_of_prototype(Prototype::Rect, 1.5), DomainError);
  EXPECT_THROW(quantile_of_prototype(Prototype::Gaussian, -0.1), DomainError);
}

TEST(Kernels, GaussianPrototypeSecondMomentIsHalf) {
  // Midpoint rule in p; the integrand has integrable log-type tails.
  const int m = 2000000;
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double q = quantile_of_prototype(Prototype::Gaussian, (i + 0.5) / m);
    s += q * q / m;
  }
  EXPECT_NEAR(s, 0.5, 1e-5);
  EXPECT_NEAR(prototype_quantile_sq_integral(Prototype::Gaussian, 0.0, 1.0), 0.5, 1e-15);
  EXPECT_NEAR(prototype_quantile_sq_integral(Prototype::Rect, 0.0, 1.0), 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(prototype_quantile_integral(Prototype::Gaussian, 0.0, 1.0), 0.0, 1e-15);
}

TEST(Kernels, CellIntegralsMatchQuadrature) {
  for (auto proto : {Prototype::Gaussian, Prototype::Rect}) {
    for (auto [a, b] : {std::pair{0.01, 0.2}, std::pair{0.3, 0.31}, std::pair{0.6, 0.99}}) {
      auto q = [&](double p) { return quantile_of_prototype(proto, p); };
      const double i1 = simpson(q, a, b, 2000);
      const double i2 = simpson([&](double p) { return q(p) * q(p); }, a, b, 2000);
      EXPECT_NEAR(prototype_quantile_integral(proto, a, b), i1, 1e-10);
      EXPECT_NEAR(prototype_quantile_sq_integral(proto, a, b), i2, 1e-10);
    }
  }
}

TEST(Kernels, SymmetricPrototypeQuantilesAreOddAndMonotone) {
  for (auto proto : {Prototype::Gaussian, Prototype::Rect}) {
    double prev = -INFINITY;
    for (int i = 1; i < 1000; ++i) {
      const double p = i / 1000.0;
      const double q = quantile_of_prototype(proto, p);
      EXPECT_NEAR(q, -quantile_of_prototype(proto, 1.0 - p), 1e-9);
      EXPECT_GE(q, prev);
      prev = q;
    }
  }
}

TEST(Kernels, TimeFrequencyRoundTrip) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (auto id : {FamilyId::ExpCos, FamilyId::Sinc, FamilyId::Cosine, FamilyId::SpectralMixtureSE,
                  FamilyId::SpectralMixtureRect, FamilyId::IsotropicSE}) {
    const std::size_t k = is_mixture(id) ? 3 : 1;
    std::vector<Component> comps;
    for (std::size_t i = 0; i < k; ++i) comps.push_back({u(rng), id == FamilyId::IsotropicSE ? 0.0 : 0.05 * u(rng), u(rng)});
    const KernelModel m(KernelFamily{id, k}, comps, 0.3);
    const auto back = params_time_to_freq(params_freq_to_time(m));
    ASSERT_EQ(back.components().size(), k);
    for (std::size_t i = 0; i < k; ++i) {
      EXPECT_NEAR(back.components()[i].magnitude, m.components()[i].magnitude, 1e-12 * m.components()[i].magnitude);
      EXPECT_NEAR(back.components()[i].location, m.components()[i].location, 1e-15);
      EXPECT_NEAR(back.components()[i].scale, m.components()[i].scale, 1e-12 * m.components()[i].scale);
    }
    EXPECT_EQ(back.noise_variance(), 0.3);
    const auto th = m.theta();
    EXPECT_EQ(KernelModel::from_theta(id, th, 0.3), m);
  }
}

TEST(Kernels, TimeDomainViewMatchesKernel) {
  const auto m = single(FamilyId::ExpCos, 2.0, 0.03, 0.004);
  const auto t = params_freq_to_time(m).components[0];
  for (double tau : {0.0, 5.0, 37.0, 120.0}) {
    const double direct = t.variance * std::exp(-tau * tau / (2 * t.lengthscale * t.lengthscale)) * std::cos(2 * kPi * t.frequency * tau);
    EXPECT_NEAR(eval_kernel(m, tau), direct, 1e-12);
  }
  const auto s = single(FamilyId::Sinc, 1.5, 0.02, 0.01);
  const auto ts = params_freq_to_time(s).components[0];
  for (double tau : {3.0, 77.0}) {
    const double x = tau / ts.lengthscale;
    const double direct = ts.variance * std::sin(kPi * x) / (kPi * x) * std::cos(2 * kPi * ts.frequency * tau);
    EXPECT_NEAR(eval_kernel(s, tau), direct, 1e-12);
  }
}

TEST(Kernels, SincMapsToRectOfGivenCentreAndWidth) {
  TimeDomainModel t{KernelFamily{FamilyId::Sinc, 1}, {{1.0, 0.05, 100.0}}, 0.0};
  const auto m = params_time_to_freq(t);
  EXPECT_NEAR(m.components()[0].location, 0.05, 1e-15);
  EXPECT_NEAR(m.components()[0].scale, 0.01, 1e-15);
  const double inside[] = {0.0451, 0.05, 0.0549};
  const double outside[] = {0.0449, 0.0551};
  for (double v : eval_psd(m, inside)) EXPECT_GT(v, 0.0);
  for (double v : eval_psd(m, outside)) EXPECT_EQ(v, 0.0);
}

TEST(Kernels, MixtureMapsComponentwise) {
  const KernelModel mix(KernelFamily{FamilyId::SpectralMixtureSE, 2}, {{1.0, 0.02, 0.003}, {2.0, 0.03, 0.005}});
  const auto tm = params_freq_to_time(mix);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& c = mix.components()[i];
    EXPECT_EQ(tm.components[i], params_freq_to_time(single(FamilyId::ExpCos, c.magnitude, c.location, c.scale)).components[0]);
  }
}

TEST(Kernels, SingleComponentMixtureEqualsBaseFamily) {
  const std::vector<double> lags = {0.0, 1.0, 13.5, 80.0};
  const std::vector<double> freqs = {0.0, 0.01, 0.049, 0.05, 0.051, 0.2};
  for (auto [mix, base] : {std::pair{FamilyId::SpectralMixtureSE, FamilyId::ExpCos},
                           std::pair{FamilyId::SpectralMixtureRect, FamilyId::Sinc}}) {
    const KernelModel a(KernelFamily{mix, 1}, {{1.3, 0.05, 0.01}}, 0.2);
    const auto b = single(base, 1.3, 0.05, 0.01, 0.2);
    EXPECT_EQ(eval_kernel(a, lags), eval_kernel(b, lags));
    EXPECT_EQ(eval_psd(a, freqs), eval_psd(b, freqs));
  }
}

TEST(Kernels, NoiseOnlyAtZeroLag) {
  const auto m = single(FamilyId::ExpCos, 1, 0.05, 0.01, 0.7);
  const auto clean = m.with_noise(0.0);
  EXPECT_NEAR(eval_kernel(m, 0.0) - eval_kernel(clean, 0.0), 0.7, 1e-15);
  EXPECT_EQ(eval_kernel(m, 1e-9), eval_kernel(clean, 1e-9));
}

TEST(Kernels, PsdIsNonnegativeForRandomParameters) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.001, 1.0);
  std::vector<double> grid;
  for (int i = -200; i <= 2000; ++i) grid.push_back(i * 5e-4);
  for (int trial = 0; trial < 200; ++trial) {
    for (auto id : {FamilyId::ExpCos, FamilyId::Sinc, FamilyId::SpectralMixtureSE, FamilyId::SpectralMixtureRect,
                    FamilyId::IsotropicSE}) {
      const std::size_t k = is_mixture(id) ? 4 : 1;
      std::vector<Component> c;
      for (std::size_t i = 0; i < k; ++i) c.push_back({u(rng), id == FamilyId::IsotropicSE ? 0.0 : 0.5 * u(rng), 0.1 * u(rng)});
      const KernelModel m(KernelFamily{id, k}, c);
      for (double v : eval_psd(m, grid)) ASSERT_GE(v, 0.0);
      for (double v : eval_psd_two_sided(m, grid)) ASSERT_GE(v, 0.0);
    }
  }
}

TEST(Kernels, KernelAtZeroEqualsPsdMassPlusNoise) {
  for (auto id : {FamilyId::ExpCos, FamilyId::Sinc, FamilyId::SpectralMixtureSE, FamilyId::IsotropicSE}) {
    const std::size_t k = is_mixture(id) ? 2 : 1;
    std::vector<Component> c(k, Component{0.8, id == FamilyId::IsotropicSE ? 0.0 : 0.1, 0.02});
    if (k == 2) c[1] = {1.7, 0.3, 0.05};
    if (id == FamilyId::IsotropicSE) c[0].scale = 3.0;
    const KernelModel m(KernelFamily{id, k}, c, 0.4);
    // One-sided PSD integrated over [0, 1]; the rect edges are handled by the fine grid.
    const int panels = 2000000;
    const double h = 1.0 / panels;
    double mass = 0.0;
    std::vector<double> x(panels);
    for (int i = 0; i < panels; ++i) x[i] = (i + 0.5) * h;
    for (double v : eval_psd(m, x)) mass += v * h;
    EXPECT_NEAR(eval_kernel(m, 0.0), mass + 0.4, 1e-6 * (mass + 0.4)) << to_string(id);
  }
}

TEST(Kernels, PlancherelForSinc) {
  // sum K^2 dtau over a long lag window vs the exact int S2^2 = a^2 sigma / 2.
  const auto m = single(FamilyId::Sinc, 1.0, 0.05, 0.01);
  const double dt = 0.5, T = 4e5;
  double lhs = eval_kernel(m, 0.0) * eval_kernel(m, 0.0) * dt;
  for (double t = dt; t <= T; t += dt) {
    const double k = eval_kernel(m, t);
    lhs += 2.0 * k * k * dt;
  }
  const double rhs = 0.01 / 2.0;
  EXPECT_NEAR(lhs, rhs, 1e-3 * rhs);
}

TEST(Kernels, InvalidParametersThrow) {
  EXPECT_THROW(single(FamilyId::ExpCos, 1, 0.05, 0.0), ParameterDomainError);
  EXPECT_THROW(single(FamilyId::ExpCos, 1, 0.05, -1.0), ParameterDomainError);
  EXPECT_THROW(single(FamilyId::Sinc, -1, 0.05, 0.1), ParameterDomainError);
  EXPECT_THROW(single(FamilyId::Sinc, 1, -0.05, 0.1), ParameterDomainError);
  EXPECT_THROW(single(FamilyId::Sinc, 1, 0.05, 0.1, -1.0), ParameterDomainError);
  EXPECT_THROW(KernelModel(KernelFamily{FamilyId::ExpCos, 2}, {{}, {}}), ParameterDomainError);
  const double bad[] = {1.0, 0.1};
  EXPECT_THROW(KernelModel::from_theta(FamilyId::ExpCos, bad), ParameterDomainError);
  EXPECT_THROW(parse_family("Matern"), SchemaError);
  const double nan_lag[] = {NAN};
  EXPECT_THROW(eval_kernel(single(FamilyId::ExpCos, 1, 0, 1), nan_lag), DomainError);
}

TEST(Kernels, CosineDepositsAtomAtNearestFrequency) {
  const KernelModel m(KernelFamily{FamilyId::Cosine, 1}, {{2.0, 0.0502, 1.0}});
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(i * 0.001);
  const auto p = eval_psd(m, grid);
  EXPECT_NEAR(p[50], 2.0 / 0.001, 1e-9);
  double mass = 0.0;
  for (double v : p) mass += v * 0.001;
  EXPECT_NEAR(mass, 2.0, 1e-12);
}
