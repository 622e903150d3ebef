#pragma once

// Covariance and PSD estimators for evenly or unevenly sampled series.
//
// Periodogram scaling: with dt = span / (n - 1),
//     S(xi) = (2 dt / n) |sum_i y_i w_i exp(-j 2 pi xi t_i)|^2,
// a one-sided density whose integral over [0, Nyquist] approaches the sample variance.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "gvm/types.hpp"

namespace gvm {

enum class Window { None, Hann, Hamming };
enum class MeanHandling { Subtract, Keep };

Window parse_window(std::string_view name);  // "none", "hann", "hamming"
std::string_view to_string(Window w);

/// Throws InsufficientDataError (n < 2) or DomainError (unsorted times, non-finite values).
void validate_series(const TimeSeries& ts);

double median_gap(std::span<const double> times);
/// 0.5 / median time gap.
double nyquist_estimate(const TimeSeries& ts);
/// Uniform grid of k frequencies on [lo, hi].
std::vector<double> linear_grid(double lo, double hi, std::size_t k);
/// Default grid: k points on [1 / span, Nyquist].
std::vector<double> default_frequency_grid(const TimeSeries& ts, std::size_t k = 500);

/// Window weights for the given times, renormalized so that sum w^2 = n.
std::vector<double> window_weights(Window window, std::span<const double> times);

/// Binned empirical covariance. Exactly-zero lags go to bin 0; any other lag to bin
/// max(1, round(lag / bin_width)). Bins beyond max_lag and empty bins are dropped.
EmpiricalCovariance empirical_covariance(const TimeSeries& ts, double bin_width, double max_lag,
                                         MeanHandling mean = MeanHandling::Subtract);
/// bin_width = median gap, max_lag = span.
EmpiricalCovariance empirical_covariance(const TimeSeries& ts);

SpectralEstimate periodogram(const TimeSeries& ts, std::span<const double> freqs, Window window = Window::None);
SpectralEstimate bartlett(const TimeSeries& ts, std::span<const double> freqs, std::size_t segments,
                          Window window = Window::None);
SpectralEstimate welch(const TimeSeries& ts, std::span<const double> freqs, std::size_t segments,
                       double overlap_fraction, Window window = Window::Hann);

/// One-sided cosine transform of the symmetrically extended binned covariance,
///     S(xi) = 2 dtau [K0 + 2 sum_k K_k cos(2 pi xi tau_k)],
/// with negative values clipped (clip mass in diagnostics "clipped_mass").
SpectralEstimate psd_from_covariance(const EmpiricalCovariance& cov, std::span<const double> freqs);
/// Default grid: 500 points on [1 / max lag, 0.5 / bin width].
std::vector<double> default_covariance_grid(const EmpiricalCovariance& cov, std::size_t k = 500);

/// Integral of psd over the grid using cell widths.
double spectral_mass(std::span<const double> freqs, std::span<const double> psd);

}  // namespace gvm
