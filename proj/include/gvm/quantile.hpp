#pragma once

// Quantile functions of discrete spectral measures.
//
// A spectrum on a grid is read as a set of atoms: bin j carries mass psd[j] * width[j]
// at freqs[j]. The CDF is then a step function and its generalized inverse
// Q(p) = inf{x : F(x) >= p} is piecewise constant on the cells (c[i-1], c[i]].
// Wasserstein distances between two such tables are computed exactly by merging
// the breakpoints of both CDFs.

#include <cstddef>
#include <span>
#include <vector>

#include "gvm/types.hpp"

namespace gvm {

/// m equally spaced probabilities 0, 1/(m-1), ..., 1.
std::vector<double> uniform_probs(std::size_t m);

/// Cell widths of a (possibly non-uniform) increasing grid; end cells copy their neighbour gap.
std::vector<double> grid_cell_widths(std::span<const double> grid);

class QuantileTable {
 public:
  /// Builds the table of the normalized measure sum_j w[j] delta(x - locs[j]).
  /// Zero weights are dropped; throws DegenerateSpectrumError for zero or non-finite mass
  /// and DomainError for negative weights.
  static QuantileTable from_atoms(std::span<const double> locs, std::span<const double> weights);

  /// Atom locations, strictly increasing.
  const std::vector<double>& values() const { return values_; }
  /// Cumulative probabilities at the right end of each cell; last entry is 1.
  const std::vector<double>& cdf() const { return cdf_; }
  /// Mass before normalization.
  double mass() const { return mass_; }
  std::size_t cells() const { return values_.size(); }

  /// Left end of cell i.
  double cell_lo(std::size_t i) const { return i == 0 ? 0.0 : cdf_[i - 1]; }

  double operator()(double p) const;
  std::vector<double> sample(std::span<const double> probs) const;

  /// Integral of Q over [0, 1].
  double mean() const;

 private:
  std::vector<double> values_;
  std::vector<double> cdf_;
  double mass_ = 0.0;
};

/// Quantile table of a SpectralEstimate (atoms at grid points, mass psd * cell width).
QuantileTable quantile_from_spectrum(const SpectralEstimate& s);
/// Same for a bare grid function.
QuantileTable quantile_from_grid(std::span<const double> grid, std::span<const double> density);

double wasserstein1(const QuantileTable& a, const QuantileTable& b);
/// Squared 2-Wasserstein distance, integral of (Qa - Qb)^2 over [0, 1].
double wasserstein2_squared(const QuantileTable& a, const QuantileTable& b);

}  // namespace gvm
