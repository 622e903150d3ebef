#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gvm/kernels.hpp"
#include "gvm/solvers.hpp"
#include "gvm/types.hpp"

namespace gvm {

inline constexpr std::size_t kDefaultGpCap = 16384;

struct GramMatrix {
  Eigen::MatrixXd matrix;
  double jitter = 0.0;
};

/// [K]_ij = K(t_i - t_j) with the noise variance on the diagonal.
GramMatrix gram_matrix(const KernelModel& model, std::span<const double> times);
/// Isotropic Gram matrix over the rows of `locations`, distance r = ||x_i - x_j||.
GramMatrix gram_matrix(const KernelModel& model, const Eigen::MatrixXd& locations);

/// Cholesky factor computed in place. Jitter escalates through
/// 0, 1e-10, 1e-9, ..., 1e-6 times the mean diagonal; throws ConditioningError after that.
class Cholesky {
 public:
  explicit Cholesky(Eigen::MatrixXd matrix);
  explicit Cholesky(GramMatrix gram) : Cholesky(std::move(gram.matrix)) {}

  double jitter() const { return jitter_; }
  std::size_t size() const { return static_cast<std::size_t>(factor_.rows()); }
  double log_det() const;
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  /// L z
  Eigen::VectorXd lower_times(const Eigen::VectorXd& z) const;

 private:
  Eigen::MatrixXd factor_;  // lower triangle holds L
  double jitter_ = 0.0;
};

/// Draws from N(0, K(t)) with a Cholesky factor. n must not exceed `cap`.
TimeSeries sample_gp(const KernelModel& model, std::span<const double> times, std::uint64_t seed,
                     std::size_t cap = kDefaultGpCap);
/// Draws at the rows of `locations` (isotropic models).
Eigen::VectorXd sample_gp(const KernelModel& model, const Eigen::MatrixXd& locations, std::uint64_t seed,
                          std::size_t cap = kDefaultGpCap);

/// Fast draw on the lattice t0 + i * dt, i < n. Uses circulant embedding when the
/// embedding is nonnegative definite, otherwise exact Cholesky for small n or spectral
/// synthesis from the two-sided PSD on an 8x padded periodic grid. `method` reports the path.
TimeSeries sample_gp_lattice(const KernelModel& model, std::size_t n, double dt, std::uint64_t seed,
                             double t0 = 0.0, std::string* method = nullptr);
/// n times drawn without replacement from a lattice of oversample * n points over [0, span].
TimeSeries sample_gp_random_times(const KernelModel& model, std::size_t n, double span, std::uint64_t seed,
                                  std::size_t oversample = 4, std::string* method = nullptr);

/// Negative log-likelihood of a zero-mean GP:
///   1/2 y' K^-1 y + 1/2 log|K| + n/2 log 2 pi.
double nll(const KernelModel& model, const TimeSeries& ts, std::size_t cap = kDefaultGpCap);
double nll(const Cholesky& chol, const Eigen::VectorXd& y);

/// -1/2 (tr(K1^-1 K0) - n + log(|K1| / |K0|)); always <= 0.
double nkl(const Eigen::MatrixXd& k0, const Eigen::MatrixXd& k1);
/// -1/2 tr(K^-1 Kbar) - 1/2 log|K| - n/2 log 2 pi.
double expected_log_likelihood(const Eigen::MatrixXd& k_theta, const Eigen::MatrixXd& k_bar);

struct MlOptions {
  int max_iters = 500;
  int max_evals = 0;  // 0: 20 * max_iters
  double tolerance = 1e-8;
  std::size_t cap = kDefaultGpCap;
  /// Parameter magnitude above which a run counts as diverged.
  double divergence_threshold = 1e6;
};

/// Derivative-free minimization of nll from `init` over all kernel parameters and the noise.
/// Probes whose Gram matrix cannot be factorized are rejected. diagnostics carries
/// "init_nll", "final_nll" and "diverged" (1 when the loss is non-finite or a parameter
/// exceeds the divergence threshold).
FitResult ml_refine(const KernelModel& init, const TimeSeries& ts, const MlOptions& opt = {});
bool is_diverged(const KernelModel& model, double loss, double threshold = 1e6);

struct MlBoundReport {
  double kl = 0.0;     // D_KL(K0 || K_theta)
  double bound = 0.0;  // 1/2 ||K0^-1||_2 ||K_theta^-1||_2 ||K0 - K_theta||_F
  bool holds = false;
};

MlBoundReport ml_bound_report(const Eigen::MatrixXd& k0, const KernelModel& theta_star, std::span<const double> times);

}  // namespace gvm
