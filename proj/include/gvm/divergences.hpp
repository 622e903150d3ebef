#pragma once

// Discrepancies between an estimate (a) and a model (b) sampled on a shared grid.
//
//   L1   int |a - b|
//   L2   int (a - b)^2                      (squared; sqrt(L2) is the metric)
//   KL   int a log(a / b) - a + b           (extended form, >= 0 for unnormalized inputs)
//   IS   int a / b - log(a / b) - 1
//   W1   int_0^1 |Qa - Qb| dp
//   W2   int_0^1 (Qa - Qb)^2 dp             (squared distance)
//
// Vertical divergences use the trapezoid rule on the grid. W1/W2 normalize both inputs
// and use exact quantile tables. KL and IS floor both sides at eps = floor_rel * max(b).

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gvm/kernels.hpp"
#include "gvm/types.hpp"

namespace gvm {

enum class Metric { L1, L2, W1, W2, KL, IS };
enum class Domain { Temporal, Spectral };

struct DivergenceId {
  Domain domain = Domain::Spectral;
  Metric metric = Metric::W2;

  bool operator==(const DivergenceId&) const = default;
};

/// "time:l1", "freq:w2", ...
std::string to_string(DivergenceId id);
/// Throws SchemaError for unknown strings or metrics invalid in the given domain.
DivergenceId parse_divergence(std::string_view s);
bool is_valid(DivergenceId id);

struct DivergenceOptions {
  /// Floor for KL/IS relative to max(b). Zero disables flooring; a support violation then throws.
  double floor_rel = 1e-12;
};

double trapezoid(std::span<const double> x, std::span<const double> f);

double divergence(Metric m, std::span<const double> grid, std::span<const double> a, std::span<const double> b,
                  const DivergenceOptions& opt = {});
double divergence(DivergenceId id, std::span<const double> grid, std::span<const double> a,
                  std::span<const double> b, const DivergenceOptions& opt = {});

/// eval_kernel(model, lags) - estimates, noise included at lag 0.
std::vector<double> temporal_residuals(const KernelModel& model, const EmpiricalCovariance& cov);
double temporal_loss(const KernelModel& model, const EmpiricalCovariance& cov, Metric m);

/// D(s || eval_psd(model)) on s.freqs.
double spectral_loss(const KernelModel& model, const SpectralEstimate& s, DivergenceId id,
                     const DivergenceOptions& opt = {});

}  // namespace gvm
