#include "gvm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gvm/error.hpp"
#include "gvm/estimators.hpp"

namespace gvm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec == std::errc() && ptr == last) return true;
  // from_chars rejects "inf"/"nan" spellings produced by some writers.
  if (s == "inf" || s == "+inf") return v = INFINITY, true;
  if (s == "-inf") return v = -INFINITY, true;
  if (s == "nan") return v = NAN, true;
  return false;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw IoError("CSV has no column '" + name + "'");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (first) {
      first = false;
      double probe = 0.0;
      if (!parse_double(fields.front(), probe)) {
        t.header = fields;
        t.columns.resize(fields.size());
        continue;
      }
      t.columns.resize(fields.size());
    }
    if (fields.size() != t.columns.size()) {
      throw IoError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.columns.size()) + " fields");
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      if (!parse_double(fields[c], v)) throw IoError(path + ":" + std::to_string(lineno) + ": bad number '" + fields[c] + "'");
      t.columns[c].push_back(v);
    }
  }
  if (t.rows() == 0) throw IoError("'" + path + "' holds no data rows");
  return t;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (std::size_t c = 0; c < table.header.size(); ++c) out << (c ? "," : "") << table.header[c];
  if (!table.header.empty()) out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << format_double(table.columns[c][r]);
    out << '\n';
  }
  if (!out) throw IoError("failed while writing '" + path + "'");
}

TimeSeries read_time_series_csv(const std::string& path) {
  const auto t = read_csv(path);
  if (t.columns.size() != 2) throw IoError("time series CSV needs two columns time,value");
  TimeSeries ts{t.columns[0], t.columns[1]};
  try {
    validate_series(ts);
  } catch (const Error& e) {
    throw IoError("'" + path + "': " + e.what());
  }
  return ts;
}

void write_time_series_csv(const std::string& path, const TimeSeries& ts) {
  write_csv(path, CsvTable{{"time", "value"}, {ts.times, ts.values}});
}

PointCloudSeries read_point_cloud_csv(const std::string& path) {
  const auto t = read_csv(path);
  if (t.columns.size() < 2) throw IoError("point cloud CSV needs columns x1..xd,value");
  const std::size_t d = t.columns.size() - 1;
  PointCloudSeries pc;
  pc.locations.resize(static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(d));
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < t.rows(); ++r) pc.locations(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t.columns[c][r];
  }
  pc.values = t.columns[d];
  try {
    validate_point_cloud(pc);
  } catch (const Error& e) {
    throw IoError("'" + path + "': " + e.what());
  }
  return pc;
}

void write_point_cloud_csv(const std::string& path, const PointCloudSeries& pc) {
  CsvTable t;
  for (Eigen::Index c = 0; c < pc.locations.cols(); ++c) {
    t.header.push_back("x" + std::to_string(c + 1));
    std::vector<double> col(static_cast<std::size_t>(pc.locations.rows()));
    for (Eigen::Index r = 0; r < pc.locations.rows(); ++r) col[static_cast<std::size_t>(r)] = pc.locations(r, c);
    t.columns.push_back(std::move(col));
  }
  t.header.push_back("value");
  t.columns.push_back(pc.values);
  write_csv(path, t);
}

void write_covariance_csv(const std::string& path, const EmpiricalCovariance& cov) {
  std::vector<double> counts(cov.counts.begin(), cov.counts.end());
  write_csv(path, CsvTable{{"lag", "estimate", "count"}, {cov.lag_centers, cov.estimates, counts}});
}

EmpiricalCovariance read_covariance_csv(const std::string& path) {
  const auto t = read_csv(path);
  EmpiricalCovariance cov;
  cov.lag_centers = t.columns.at(t.column("lag"));
  cov.estimates = t.columns.at(t.column("estimate"));
  for (double c : t.columns.at(t.column("count"))) cov.counts.push_back(static_cast<std::int64_t>(std::llround(c)));
  cov.bin_width = cov.size() > 1 ? cov.lag_centers[1] - cov.lag_centers[0] : 1.0;
  for (std::size_t i = 2; i < cov.size(); ++i) cov.bin_width = std::min(cov.bin_width, cov.lag_centers[i] - cov.lag_centers[i - 1]);
  return cov;
}

void write_spectrum_csv(const std::string& path, const SpectralEstimate& s) {
  write_csv(path, CsvTable{{"freq", "psd"}, {s.freqs, s.psd}});
}

SpectralEstimate read_spectrum_csv(const std::string& path) {
  const auto t = read_csv(path);
  SpectralEstimate s;
  s.freqs = t.columns.at(t.column("freq"));
  s.psd = t.columns.at(t.column("psd"));
  s.total_mass = spectral_mass(s.freqs, s.psd);
  return s;
}

}  // namespace gvm
