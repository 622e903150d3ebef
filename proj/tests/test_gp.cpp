#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gvm/error.hpp"
#include "gvm/estimators.hpp"
#include "gvm/gp.hpp"

using namespace gvm;

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

KernelModel expcos(double a, double mu, double sigma, double noise = 0.0) {
  return KernelModel(KernelFamily{FamilyId::ExpCos, 1}, {{a, mu, sigma}}, noise);
}

// Direct evaluation with a full-pivot LU and an explicit determinant.
double brute_nll(const Eigen::MatrixXd& k, const Eigen::VectorXd& y) {
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
  return 0.5 * y.dot(lu.solve(y)) + 0.5 * std::log(lu.determinant()) + 0.5 * y.size() * kLog2Pi;
}

}  // namespace

TEST(Gp, GramMatrixMatchesKernel) {
  const auto m = expcos(1.0, 0.05, 0.02, 0.3);
  const std::vector<double> even{0, 0.5, 1.0, 1.5, 2.0};
  const std::vector<double> uneven{0, 0.3, 1.1, 1.2, 4.0};
  for (const auto* t : {&even, &uneven}) {
    const auto g = gram_matrix(m, *t).matrix;
    for (std::size_t i = 0; i < t->size(); ++i) {
      for (std::size_t j = 0; j < t->size(); ++j) {
        const double expect = eval_kernel(m.with_noise(0.0), (*t)[i] - (*t)[j]) + (i == j ? 0.3 : 0.0);
        EXPECT_NEAR(g(i, j), expect, 1e-14);
      }
    }
  }
}

TEST(Gp, NllScalar) {
  const auto m = expcos(1.0, 0.0, 0.1, 0.5);
  const double v = eval_kernel(m, 0.0);
  TimeSeries ts{{0.0}, {1.3}};
  EXPECT_NEAR(nll(m, ts), 0.5 * 1.3 * 1.3 / v + 0.5 * std::log(v) + 0.5 * kLog2Pi, 1e-12);
}

TEST(Gp, NllTwoPoints) {
  const auto m = expcos(1.0, 0.1, 0.05, 0.2);
  TimeSeries ts{{0.0, 2.0}, {0.4, -1.1}};
  const double a = eval_kernel(m, 0.0), b = eval_kernel(m, 2.0);
  const double det = a * a - b * b;
  const double quad = (a * 0.4 * 0.4 - 2 * b * 0.4 * -1.1 + a * 1.1 * 1.1) / det;
  EXPECT_NEAR(nll(m, ts), 0.5 * quad + 0.5 * std::log(det) + kLog2Pi, 1e-12);
}

TEST(Gp, NllMatchesBruteForceOnSmallProblems) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + trial % 6;
    std::vector<double> t(n);
    for (auto& x : t) x = u(rng);
    std::sort(t.begin(), t.end());
    TimeSeries ts{t, {}};
    for (std::size_t i = 0; i < n; ++i) ts.values.push_back(nd(rng));
    const auto m = expcos(0.5 + u(rng) / 10, u(rng) / 50, 0.02 + u(rng) / 100, 0.1 + u(rng) / 10);
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ts.values.data(), n);
    EXPECT_NEAR(nll(m, ts), brute_nll(gram_matrix(m, t).matrix, y), 1e-9);
  }
}

TEST(Gp, NklExamples) {
  const Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_NEAR(nkl(i2, i2), 0.0, 1e-15);
  // -1/2 (tr(I / 2) - 2 + log 4)
  EXPECT_NEAR(nkl(i2, 2 * i2), -0.5 * (1.0 - 2.0 + std::log(4.0)), 1e-15);
  EXPECT_NEAR(nkl(i2, 2 * i2), -0.1931, 1e-4);
}

TEST(Gp, NklIsNonPositive) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(5, 5, [&]() { return u(rng); });
    const Eigen::MatrixXd b = Eigen::MatrixXd::NullaryExpr(5, 5, [&]() { return u(rng); });
    const Eigen::MatrixXd k0 = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(5, 5);
    const Eigen::MatrixXd k1 = b * b.transpose() + 0.1 * Eigen::MatrixXd::Identity(5, 5);
    EXPECT_LE(nkl(k0, k1), 1e-12);
  }
}

TEST(Gp, ExpectedLogLikelihoodDecomposesIntoNkl) {
  const std::vector<double> t{0, 1, 2.5, 4, 7};
  const auto kbar = gram_matrix(expcos(1.0, 0.05, 0.05, 0.3), t).matrix;
  const auto kt = gram_matrix(expcos(2.0, 0.08, 0.03, 0.5), t).matrix;
  EXPECT_NEAR(expected_log_likelihood(kt, kbar) - expected_log_likelihood(kbar, kbar), nkl(kbar, kt), 1e-12);
}

TEST(Gp, ExpectedLogLikelihoodMonteCarlo) {
  const std::vector<double> t{0, 1, 2.5, 4, 7};
  const auto truth = expcos(1.0, 0.05, 0.05, 0.3);
  const auto other = expcos(2.0, 0.08, 0.03, 0.5);
  const auto kt = gram_matrix(other, t).matrix;
  double acc = 0.0;
  const int draws = 4000;
  for (int s = 0; s < draws; ++s) acc -= nll(other, sample_gp(truth, t, 1000 + s)) / draws;
  EXPECT_NEAR(acc, expected_log_likelihood(kt, gram_matrix(truth, t).matrix), 0.1);
}

TEST(Gp, CholeskyJitterAndFailure) {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(4, 4);
  const Cholesky c(ones);
  EXPECT_GT(c.jitter(), 0.0);
  Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(3, 3);
  EXPECT_THROW(Cholesky{neg}, ConditioningError);
  const Eigen::MatrixXd spd = Eigen::MatrixXd::Identity(3, 3) * 4.0;
  const Cholesky d(spd);
  EXPECT_EQ(d.jitter(), 0.0);
  EXPECT_NEAR(d.log_det(), 3 * std::log(4.0), 1e-14);
}

TEST(Gp, LatticeSamplerMoments) {
  const auto m = expcos(1.0, 0.05, 0.02, 0.25);
  std::string method;
  double v0 = 0.0, v3 = 0.0;
  const int seeds = 40;
  for (int s = 0; s < seeds; ++s) {
    const auto ts = sample_gp_lattice(m, 2000, 1.0, s, 0.0, &method);
    const auto c = empirical_covariance(ts, 1.0, 3.0, MeanHandling::Keep);
    v0 += c.estimates[0] / seeds;
    v3 += c.estimates[3] / seeds;
  }
  EXPECT_EQ(method, "circulant");
  EXPECT_NEAR(v0, eval_kernel(m, 0.0), 0.05);
  EXPECT_NEAR(v3, eval_kernel(m, 3.0), 0.05);
}

TEST(Gp, LatticeSamplerFallbacks) {
  // A pure cosine has no nonnegative circulant embedding at an incommensurate frequency.
  const KernelModel cosine(KernelFamily{FamilyId::Cosine, 1}, {{1.0, 0.0123, 1.0}}, 0.1);
  std::string method;
  double v0 = 0.0, c50 = 0.0;
  const int seeds = 400;
  for (int s = 0; s < seeds; ++s) {
    const auto ts = sample_gp_lattice(cosine, 300, 1.0, s, 0.0, &method);
    v0 += ts.values[0] * ts.values[0] / seeds;
    c50 += ts.values[0] * ts.values[50] / seeds;
  }
  EXPECT_EQ(method, "cholesky");
  EXPECT_NEAR(v0, 1.1, 0.25);
  EXPECT_NEAR(c50, std::cos(2 * std::numbers::pi * 0.0123 * 50), 0.25);
  sample_gp_lattice(cosine, 3000, 1.0, 1, 0.0, &method);
  EXPECT_EQ(method, "spectral");
}

TEST(Gp, RandomTimesAreSortedSubsetOfLattice) {
  const auto ts = sample_gp_random_times(expcos(1.0, 0.05, 0.02), 200, 100.0, 4);
  ASSERT_EQ(ts.size(), 200u);
  EXPECT_TRUE(std::is_sorted(ts.times.begin(), ts.times.end()));
  const double dt = 100.0 / (4 * 200 - 1);
  for (double t : ts.times) EXPECT_NEAR(std::remainder(t, dt), 0.0, 1e-9);
}

TEST(Gp, SamplerIsDeterministicPerSeed) {
  const auto m = expcos(1.0, 0.05, 0.02, 0.1);
  EXPECT_EQ(sample_gp_lattice(m, 500, 1.0, 9).values, sample_gp_lattice(m, 500, 1.0, 9).values);
  EXPECT_NE(sample_gp_lattice(m, 500, 1.0, 9).values, sample_gp_lattice(m, 500, 1.0, 10).values);
}

TEST(Gp, CapIsEnforced) {
  std::vector<double> t(20);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = i;
  EXPECT_THROW(sample_gp(expcos(1, 0, 0.1), t, 1, 10), DomainError);
}

TEST(Gp, MlRefineDoesNotWorsenLikelihood) {
  const auto truth = expcos(1.0, 0.05, 0.02, 0.3);
  const auto ts = sample_gp_lattice(truth, 300, 1.0, 2);
  MlOptions opt;
  opt.max_iters = 200;
  const auto r = ml_refine(expcos(2.0, 0.07, 0.03, 0.6), ts, opt);
  EXPECT_LE(r.diagnostics.get("final_nll"), r.diagnostics.get("init_nll"));
  EXPECT_NEAR(r.loss, nll(r.model, ts), 1e-8);
  EXPECT_EQ(r.diagnostics.get("diverged"), 0.0);
}

TEST(Gp, DivergenceDetection) {
  EXPECT_FALSE(is_diverged(expcos(1, 0.1, 0.1), 3.0));
  EXPECT_TRUE(is_diverged(expcos(1, 0.1, 0.1), std::nan("")));
  EXPECT_TRUE(is_diverged(expcos(1e7, 0.1, 0.1), 3.0));
  EXPECT_TRUE(is_diverged(expcos(1, 0.1, 0.1, 2e6), 3.0));
}

TEST(Gp, MlBoundHoldsForModerateModels) {
  const std::vector<double> t{0, 1, 2, 3, 4, 5, 6, 7};
  const auto truth = expcos(0.3, 0.05, 0.1, 1.0);
  const auto k0 = gram_matrix(truth, t).matrix;
  for (const auto& fit : {expcos(0.35, 0.06, 0.09, 0.9), expcos(0.2, 0.0, 0.2, 1.2), truth}) {
    const auto rep = ml_bound_report(k0, fit, t);
    EXPECT_TRUE(rep.holds) << rep.kl << " " << rep.bound;
    EXPECT_GE(rep.kl, 0.0);
  }
  EXPECT_NEAR(ml_bound_report(k0, truth, t).kl, 0.0, 1e-12);
}
