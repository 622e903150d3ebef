#include "gvm/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gvm/error.hpp"

namespace gvm {

std::vector<double> uniform_probs(std::size_t m) {
  if (m < 2) throw DomainError("need at least two probabilities");
  std::vector<double> p(m);
  for (std::size_t i = 0; i < m; ++i) p[i] = static_cast<double>(i) / static_cast<double>(m - 1);
  return p;
}

std::vector<double> grid_cell_widths(std::span<const double> grid) {
  const std::size_t n = grid.size();
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == 0) {
      w[j] = grid[1] - grid[0];
    } else if (j + 1 == n) {
      w[j] = grid[n - 1] - grid[n - 2];
    } else {
      w[j] = 0.5 * (grid[j + 1] - grid[j - 1]);
    }
  }
  return w;
}

QuantileTable QuantileTable::from_atoms(std::span<const double> locs, std::span<const double> weights) {
  if (locs.size() != weights.size()) throw DomainError("locations and weights differ in length");
  std::vector<std::size_t> order(locs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return locs[a] < locs[b]; });

  QuantileTable t;
  std::vector<double> mass;
  for (std::size_t k : order) {
    const double w = weights[k];
    if (!std::isfinite(w) || !std::isfinite(locs[k])) throw DegenerateSpectrumError("non-finite spectrum value");
    if (w < 0.0) throw DomainError("negative spectral mass");
    if (w == 0.0) continue;
    if (!t.values_.empty() && t.values_.back() == locs[k]) {
      mass.back() += w;
    } else {
      t.values_.push_back(locs[k]);
      mass.push_back(w);
    }
  }
  double total = 0.0;
  for (double m : mass) total += m;
  if (!(total > 0.0) || !std::isfinite(total)) throw DegenerateSpectrumError("spectrum has zero total mass");
  t.mass_ = total;
  t.cdf_.resize(mass.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    acc += mass[i];
    t.cdf_[i] = std::min(1.0, acc / total);
  }
  t.cdf_.back() = 1.0;
  return t;
}

double QuantileTable::operator()(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability outside [0, 1]");
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), p);
  if (it == cdf_.end()) return values_.back();
  return values_[static_cast<std::size_t>(it - cdf_.begin())];
}

std::vector<double> QuantileTable::sample(std::span<const double> probs) const {
  std::vector<double> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = (*this)(probs[i]);
  return out;
}

double QuantileTable::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) m += values_[i] * (cdf_[i] - cell_lo(i));
  return m;
}

QuantileTable quantile_from_grid(std::span<const double> grid, std::span<const double> density) {
  if (grid.size() != density.size()) throw DomainError("grid and density differ in length");
  const auto w = grid_cell_widths(grid);
  std::vector<double> mass(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) mass[j] = density[j] * w[j];
  return QuantileTable::from_atoms(grid, mass);
}

QuantileTable quantile_from_spectrum(const SpectralEstimate& s) { return quantile_from_grid(s.freqs, s.psd); }

namespace {

// Visits the common refinement of both CDF partitions.
template <class F>
void merge_cells(const QuantileTable& a, const QuantileTable& b, F&& f) {
  std::size_t i = 0;
  std::size_t j = 0;
  double lo = 0.0;
  const auto& ca = a.cdf();
  const auto& cb = b.cdf();
  while (i < ca.size() && j < cb.size()) {
    const double hi = std::min(ca[i], cb[j]);
    if (hi > lo) f(a.values()[i], b.values()[j], hi - lo);
    lo = std::max(lo, hi);
    if (ca[i] <= hi) ++i;
    if (j < cb.size() && cb[j] <= hi) ++j;
  }
}

}  // namespace

double wasserstein1(const QuantileTable& a, const QuantileTable& b) {
  double acc = 0.0;
  merge_cells(a, b, [&](double x, double y, double len) { acc += std::abs(x - y) * len; });
  return acc;
}

double wasserstein2_squared(const QuantileTable& a, const QuantileTable& b) {
  double acc = 0.0;
  merge_cells(a, b, [&](double x, double y, double len) { acc += (x - y) * (x - y) * len; });
  return acc;
}

}  // namespace gvm
