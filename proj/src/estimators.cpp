#include "gvm/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "gvm/error.hpp"
#include "gvm/quantile.hpp"

namespace gvm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

bool is_uniform(std::span<const double> f) {
  if (f.size() < 3) return true;
  const double step = (f.back() - f.front()) / static_cast<double>(f.size() - 1);
  const double tol = 1e-9 * std::max({std::abs(f.front()), std::abs(f.back()), std::abs(step)});
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (std::abs(f[k] - (f.front() + static_cast<double>(k) * step)) > tol) return false;
  }
  return true;
}

// |sum_i a_i exp(-j 2 pi xi t_i)|^2 for every xi.
std::vector<double> dft_power(std::span<const double> times, std::span<const double> a,
                              std::span<const double> freqs) {
  const std::size_t k = freqs.size();
  std::vector<std::complex<double>> acc(k);
  if (k == 0) return {};
  if (is_uniform(freqs) && k > 1) {
    const double f0 = freqs.front();
    const double df = (freqs.back() - f0) / static_cast<double>(k - 1);
    constexpr std::size_t kReanchor = 64;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (a[i] == 0.0) continue;
      const double t = times[i];
      const std::complex<double> rot = std::polar(1.0, -kTwoPi * df * t);
      std::complex<double> z;
      for (std::size_t j = 0; j < k; ++j) {
        if (j % kReanchor == 0) z = std::polar(1.0, -kTwoPi * (f0 + static_cast<double>(j) * df) * t);
        acc[j] += a[i] * z;
        z *= rot;
      }
    }
  } else {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < times.size(); ++i) acc[j] += a[i] * std::polar(1.0, -kTwoPi * freqs[j] * times[i]);
    }
  }
  std::vector<double> out(k);
  for (std::size_t j = 0; j < k; ++j) out[j] = std::norm(acc[j]);
  return out;
}

void check_grid(std::span<const double> freqs) {
  if (freqs.empty()) throw DomainError("empty frequency grid");
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    if (!std::isfinite(freqs[j]) || freqs[j] < 0.0) throw DomainError("frequencies must be finite and >= 0");
    if (j > 0 && !(freqs[j] > freqs[j - 1])) throw DomainError("frequency grid must be strictly increasing");
  }
}

SpectralEstimate finish(std::span<const double> freqs, std::vector<double> psd) {
  SpectralEstimate s;
  s.freqs.assign(freqs.begin(), freqs.end());
  s.psd = std::move(psd);
  s.total_mass = spectral_mass(s.freqs, s.psd);
  if (!(s.total_mass > 0.0)) s.diagnostics.warn("zero total mass");
  return s;
}

}  // namespace

Window parse_window(std::string_view name) {
  if (name == "none") return Window::None;
  if (name == "hann") return Window::Hann;
  if (name == "hamming") return Window::Hamming;
  throw SchemaError("unknown window '" + std::string(name) + "'");
}

std::string_view to_string(Window w) {
  switch (w) {
    case Window::None: return "none";
    case Window::Hann: return "hann";
    case Window::Hamming: return "hamming";
  }
  return "?";
}

void validate_series(const TimeSeries& ts) {
  if (ts.times.size() != ts.values.size()) throw DomainError("times and values differ in length");
  if (ts.times.size() < 2) throw InsufficientDataError("need at least two observations");
  for (std::size_t i = 0; i < ts.times.size(); ++i) {
    if (!std::isfinite(ts.times[i]) || !std::isfinite(ts.values[i])) throw DomainError("non-finite observation");
    if (i > 0 && !(ts.times[i] > ts.times[i - 1])) throw DomainError("times must be strictly increasing");
  }
}

double median_gap(std::span<const double> times) {
  if (times.size() < 2) throw InsufficientDataError("need at least two times");
  std::vector<double> gaps(times.size() - 1);
  for (std::size_t i = 1; i < times.size(); ++i) gaps[i - 1] = times[i] - times[i - 1];
  const std::size_t mid = gaps.size() / 2;
  std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(mid), gaps.end());
  double m = gaps[mid];
  if (gaps.size() % 2 == 0) {
    const double lo = *std::max_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lo);
  }
  return m;
}

double nyquist_estimate(const TimeSeries& ts) { return 0.5 / median_gap(ts.times); }

std::vector<double> linear_grid(double lo, double hi, std::size_t k) {
  if (k < 2 || !(hi > lo)) throw DomainError("grid needs k >= 2 and hi > lo");
  std::vector<double> g(k);
  for (std::size_t j = 0; j < k; ++j) g[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(k - 1);
  return g;
}

std::vector<double> default_frequency_grid(const TimeSeries& ts, std::size_t k) {
  validate_series(ts);
  return linear_grid(1.0 / ts.span(), nyquist_estimate(ts), k);
}

std::vector<double> window_weights(Window window, std::span<const double> times) {
  const std::size_t n = times.size();
  std::vector<double> w(n, 1.0);
  if (window == Window::None || n < 2) return w;
  const double t0 = times.front();
  const double len = times.back() - t0;
  double energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::cos(kTwoPi * (times[i] - t0) / len);
    w[i] = window == Window::Hann ? 0.5 - 0.5 * c : 0.54 - 0.46 * c;
    energy += w[i] * w[i];
  }
  const double g = std::sqrt(static_cast<double>(n) / energy);
  for (double& x : w) x *= g;
  return w;
}

EmpiricalCovariance empirical_covariance(const TimeSeries& ts, double bin_width, double max_lag, MeanHandling mean) {
  validate_series(ts);
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw DomainError("bin_width must be > 0");
  if (!(max_lag > 0.0) || max_lag > ts.span() * (1.0 + 1e-12)) throw DomainError("max_lag must lie in (0, span]");

  const std::size_t n = ts.size();
  const double mu = mean == MeanHandling::Subtract ? mean_of(ts.values) : 0.0;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = ts.values[i] - mu;

  const auto nbins = static_cast<std::size_t>(std::llround(max_lag / bin_width)) + 1;
  std::vector<double> sum(nbins, 0.0);
  std::vector<std::int64_t> cnt(nbins, 0);
  for (std::size_t i = 0; i < n; ++i) {
    sum[0] += y[i] * y[i];
    ++cnt[0];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double lag = ts.times[j] - ts.times[i];
      if (lag > max_lag) break;
      auto b = static_cast<std::size_t>(std::max<long long>(1, std::llround(lag / bin_width)));
      if (b >= nbins) continue;
      sum[b] += y[i] * y[j];
      ++cnt[b];
    }
  }

  EmpiricalCovariance out;
  out.bin_width = bin_width;
  for (std::size_t b = 0; b < nbins; ++b) {
    if (cnt[b] == 0) continue;
    out.lag_centers.push_back(static_cast<double>(b) * bin_width);
    out.estimates.push_back(sum[b] / static_cast<double>(cnt[b]));
    out.counts.push_back(cnt[b]);
  }
  if (out.size() < 2) throw InsufficientDataError("fewer than two non-empty lag bins");
  return out;
}

EmpiricalCovariance empirical_covariance(const TimeSeries& ts) {
  validate_series(ts);
  return empirical_covariance(ts, median_gap(ts.times), ts.span());
}

SpectralEstimate periodogram(const TimeSeries& ts, std::span<const double> freqs, Window window) {
  validate_series(ts);
  check_grid(freqs);
  const std::size_t n = ts.size();
  const double mu = mean_of(ts.values);
  const auto w = window_weights(window, ts.times);
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = (ts.values[i] - mu) * w[i];

  const double dt = ts.span() / static_cast<double>(n - 1);
  auto psd = dft_power(ts.times, a, freqs);
  for (double& v : psd) v *= 2.0 * dt / static_cast<double>(n);

  auto s = finish(freqs, std::move(psd));
  const double nyq = nyquist_estimate(ts);
  s.diagnostics.set("nyquist", nyq);
  s.diagnostics.set("dt", dt);
  if (freqs.back() > nyq * (1.0 + 1e-9)) s.diagnostics.warn("frequency grid exceeds the Nyquist estimate");
  return s;
}

SpectralEstimate welch(const TimeSeries& ts, std::span<const double> freqs, std::size_t segments,
                       double overlap_fraction, Window window) {
  validate_series(ts);
  check_grid(freqs);
  if (segments < 1) throw DomainError("segments must be >= 1");
  if (!(overlap_fraction >= 0.0 && overlap_fraction <= 0.9)) throw DomainError("overlap must lie in [0, 0.9]");
  const double n = static_cast<double>(ts.size());
  const double len = n / (1.0 + static_cast<double>(segments - 1) * (1.0 - overlap_fraction));
  const double hop = len * (1.0 - overlap_fraction);

  std::vector<double> acc(freqs.size(), 0.0);
  Diagnostics diag;
  for (std::size_t s = 0; s < segments; ++s) {
    const auto start = static_cast<std::size_t>(std::floor(static_cast<double>(s) * hop));
    const auto end = std::min(ts.size(), static_cast<std::size_t>(std::floor(static_cast<double>(s) * hop + len)));
    if (end < start + 16) throw InsufficientDataError("segment shorter than 16 points");
    TimeSeries seg;
    seg.times.assign(ts.times.begin() + static_cast<std::ptrdiff_t>(start), ts.times.begin() + static_cast<std::ptrdiff_t>(end));
    seg.values.assign(ts.values.begin() + static_cast<std::ptrdiff_t>(start), ts.values.begin() + static_cast<std::ptrdiff_t>(end));
    auto p = periodogram(seg, freqs, window);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += p.psd[j];
    for (auto& w : p.diagnostics.warnings) {
      if (std::find(diag.warnings.begin(), diag.warnings.end(), w) == diag.warnings.end()) diag.warn(w);
    }
  }
  for (double& v : acc) v /= static_cast<double>(segments);
  auto out = finish(freqs, std::move(acc));
  for (auto& w : diag.warnings) {
    if (std::find(out.diagnostics.warnings.begin(), out.diagnostics.warnings.end(), w) == out.diagnostics.warnings.end()) {
      out.diagnostics.warn(w);
    }
  }
  out.diagnostics.set("segments", static_cast<double>(segments));
  out.diagnostics.set("segment_length", len);
  return out;
}

SpectralEstimate bartlett(const TimeSeries& ts, std::span<const double> freqs, std::size_t segments, Window window) {
  return welch(ts, freqs, segments, 0.0, window);
}

SpectralEstimate psd_from_covariance(const EmpiricalCovariance& cov, std::span<const double> freqs) {
  if (cov.size() == 0) throw InsufficientDataError("empty covariance");
  check_grid(freqs);
  const double dtau = cov.bin_width;
  std::vector<double> raw(freqs.size());
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < cov.size(); ++k) {
      const double tau = cov.lag_centers[k];
      s += tau == 0.0 ? cov.estimates[k] : 2.0 * cov.estimates[k] * std::cos(kTwoPi * freqs[j] * tau);
    }
    raw[j] = 2.0 * dtau * s;
  }
  const auto widths = grid_cell_widths(freqs);
  double clipped = 0.0;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    if (raw[j] < 0.0) {
      clipped += -raw[j] * widths[j];
      raw[j] = 0.0;
    }
  }
  auto s = finish(freqs, std::move(raw));
  s.diagnostics.set("clipped_mass", clipped);
  return s;
}

std::vector<double> default_covariance_grid(const EmpiricalCovariance& cov, std::size_t k) {
  if (cov.size() < 2) throw InsufficientDataError("need at least two lag bins");
  return linear_grid(1.0 / cov.lag_centers.back(), 0.5 / cov.bin_width, k);
}

double spectral_mass(std::span<const double> freqs, std::span<const double> psd) {
  if (freqs.size() != psd.size()) throw DomainError("grid and psd differ in length");
  const auto w = grid_cell_widths(freqs);
  double m = 0.0;
  for (std::size_t j = 0; j < psd.size(); ++j) m += psd[j] * w[j];
  return m;
}

}  // namespace gvm
