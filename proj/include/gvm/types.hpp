#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gvm {

/// Named scalar diagnostics plus free-form warnings attached to estimates and fits.
struct Diagnostics {
  std::map<std::string, double> values;
  std::vector<std::string> warnings;

  void set(const std::string& key, double v) { values[key] = v; }
  double get(const std::string& key, double fallback = 0.0) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }
  bool has(const std::string& key) const { return values.count(key) != 0; }
  void warn(std::string msg) { warnings.push_back(std::move(msg)); }
};

/// Observations of a scalar process. Times strictly increasing, values finite.
struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const { return times.size(); }
  double span() const { return times.empty() ? 0.0 : times.back() - times.front(); }
};

/// Binned empirical covariance. Bin 0 sits at lag 0 and holds the diagonal pairs.
struct EmpiricalCovariance {
  std::vector<double> lag_centers;
  std::vector<double> estimates;
  std::vector<std::int64_t> counts;
  double bin_width = 1.0;

  std::size_t size() const { return lag_centers.size(); }
};

/// One-sided spectral density on a frequency grid; total_mass = sum psd * cell width.
struct SpectralEstimate {
  std::vector<double> freqs;
  std::vector<double> psd;
  double total_mass = 0.0;
  Diagnostics diagnostics;

  std::size_t size() const { return freqs.size(); }
};

}  // namespace gvm
