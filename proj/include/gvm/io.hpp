#pragma once

// CSV ingestion and emission. Numbers are written with %.17g so that files round-trip
// exactly; the first line is treated as a header when its first field is not numeric.

#include <string>
#include <vector>

#include "gvm/multiinput.hpp"
#include "gvm/types.hpp"

namespace gvm {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  /// Index of a named column; throws IoError when absent.
  std::size_t column(const std::string& name) const;
};

std::string format_double(double v);

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

/// Two columns time,value; header optional.
TimeSeries read_time_series_csv(const std::string& path);
void write_time_series_csv(const std::string& path, const TimeSeries& ts);

/// Columns x1..xd,value; header optional.
PointCloudSeries read_point_cloud_csv(const std::string& path);
void write_point_cloud_csv(const std::string& path, const PointCloudSeries& pc);

/// lag,estimate,count
void write_covariance_csv(const std::string& path, const EmpiricalCovariance& cov);
EmpiricalCovariance read_covariance_csv(const std::string& path);

/// freq,psd
void write_spectrum_csv(const std::string& path, const SpectralEstimate& s);
SpectralEstimate read_spectrum_csv(const std::string& path);

}  // namespace gvm
