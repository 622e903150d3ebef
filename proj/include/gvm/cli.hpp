#pragma once

// Command implementations behind the `gvm` executable. Each command takes the parsed
// JSON config plus command-line overrides, writes its files under out_dir and returns
// the JSON document it also writes (result.json etc.).
//
// Exit codes: 0 ok, 1 schema, 2 IO, 3 numeric failure.

#include <cstdint>
#include <optional>
#include <string>

#include "gvm/estimators.hpp"
#include "gvm/multiinput.hpp"
#include "gvm/serialize.hpp"

namespace gvm::cli {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  bool refine_ml = false;
};

/// Synthetic data: draws from `model` at n points over [0, span] (or [0, span]^d).
struct SyntheticSpec {
  KernelModel model{KernelFamily{}, {Component{}}};
  std::size_t n = 1000;
  double span = 1000.0;
  bool random_times = false;  // "sampling": "even" | "uniform-random"
  std::size_t dimension = 1;
  std::uint64_t seed = 0;
};

struct EstimatorSpec {
  std::string method = "periodogram";  // periodogram | bartlett | welch | covariance
  Window window = Window::None;
  std::size_t segments = 4;
  double overlap = 0.5;
  std::optional<double> grid_min;
  std::optional<double> grid_max;
  std::size_t grid_points = 500;
  std::optional<double> bin_width;
  std::optional<double> max_lag;
};

struct DataSet {
  std::optional<TimeSeries> series;
  std::optional<PointCloudSeries> cloud;
};

Json load_config(const std::string& path);
SyntheticSpec synthetic_from_json(const Json& j);
EstimatorSpec estimator_from_json(const Json& j);
Json to_json(const EstimatorSpec& e);

/// Reads "input" (+ "input_kind") or draws "synthetic"; the seed override replaces the synthetic seed.
DataSet load_data(const Json& cfg, const Overrides& ov);
TimeSeries draw_series(const SyntheticSpec& spec);
PointCloudSeries draw_cloud(const SyntheticSpec& spec);

std::vector<double> frequency_grid(const TimeSeries& ts, const EstimatorSpec& e);
SpectralEstimate estimate_spectrum(const TimeSeries& ts, const EstimatorSpec& e);
EmpiricalCovariance estimate_covariance(const TimeSeries& ts, const EstimatorSpec& e);

Json cmd_fit(const Json& cfg, const Overrides& ov);
Json cmd_sample(const Json& cfg, const Overrides& ov);
Json cmd_estimate(const Json& cfg, const Overrides& ov);
Json cmd_benchmark(const Json& cfg, const Overrides& ov);
Json cmd_recover(const Json& cfg, const Overrides& ov);

/// Maps an exception to the exit-code contract.
int exit_code(const std::exception& e);

int run(int argc, char** argv);

}  // namespace gvm::cli
