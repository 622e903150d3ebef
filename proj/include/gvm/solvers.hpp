#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gvm/divergences.hpp"
#include "gvm/kernels.hpp"
#include "gvm/quantile.hpp"
#include "gvm/types.hpp"

namespace gvm {

enum class Optimizer { Exact, NelderMead, Powell };

std::string_view to_string(Optimizer o);
Optimizer parse_optimizer(std::string_view s);  // "exact", "nelder-mead", "powell"

struct FitConfig {
  DivergenceId divergence{Domain::Spectral, Metric::W2};
  KernelFamily family{};
  Optimizer optimizer = Optimizer::Exact;
  int max_iters = 2000;
  double tolerance = 1e-10;
  /// Raw theta in the family layout; derived from the data when absent.
  std::optional<std::vector<double>> init;
  /// Starting noise variance for temporal fits.
  std::optional<double> init_noise;
  /// Temporal fits estimate the noise variance unless disabled.
  bool fit_noise = true;
  /// Carried for reproducibility records; the optimizers themselves are deterministic.
  std::uint64_t seed = 0;
};

/// Throws SchemaError when the combination of divergence, family and optimizer is invalid.
void validate(const FitConfig& cfg);

struct FitResult {
  KernelModel model{KernelFamily{}, {Component{}}};
  std::vector<double> theta_star;
  double noise_variance = 0.0;
  double loss = 0.0;
  int iterations = 0;
  int evaluations = 0;
  double elapsed = 0.0;  // seconds
  bool converged = true;
  /// False when the solver could not produce an admissible model (see diagnostics).
  bool success = true;
  std::string divergence;
  std::string optimizer;
  Diagnostics diagnostics;
  /// Best loss so far, per optimizer iteration.
  std::vector<double> loss_history;
};

/// Closed-form W2 projection onto a location-scale family:
///   mu* = int Q,  sigma* = int Q Q01 / int Q01^2,
/// with the cell integrals of Q01 evaluated exactly. The magnitude is set so that the
/// model power equals s.total_mass. sigma* <= 0 is reported with success = false.
FitResult fit_w2_location_scale(const SpectralEstimate& s, const KernelFamily& family);

/// Squared W2 between a quantile table and mu + sigma * Q01 of the given prototype.
double w2_to_location_scale(const QuantileTable& q, Prototype proto, double mu, double sigma);

FitResult fit_general(const EmpiricalCovariance& cov, const FitConfig& cfg);
FitResult fit_general(const SpectralEstimate& s, const FitConfig& cfg);

/// Peak-picking initializer; returns theta in the family layout (magnitude, location, scale per component).
std::vector<double> initialize_mixture(const SpectralEstimate& s, std::size_t components,
                                       FamilyId family = FamilyId::SpectralMixtureSE);

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
};

struct FirstOrderReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
  const CheckResult* find(std::string_view name) const;
};

/// Local-minimum certificate at theta_star ([magnitude, location, scale] or [location, scale]).
FirstOrderReport verify_first_order(const SpectralEstimate& s, const KernelFamily& family,
                                    std::span<const double> theta_star);

}  // namespace gvm
