#include <fstream>
#include <random>

#include "gvm/cli.hpp"
#include "gvm/error.hpp"
#include "gvm/gp.hpp"
#include "gvm/io.hpp"

namespace gvm::cli {

namespace {

double number(const Json& j, const char* key, std::string_view ctx) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw SchemaError(std::string(ctx) + "." + key + " must be a number");
  return v.get<double>();
}

std::size_t count(const Json& j, const char* key, std::string_view ctx) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw SchemaError(std::string(ctx) + "." + key + " must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::string text(const Json& j, const char* key, std::string_view ctx) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw SchemaError(std::string(ctx) + "." + key + " must be a string");
  return v.get<std::string>();
}

}  // namespace

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what());
  }
}

SyntheticSpec synthetic_from_json(const Json& j) {
  require_keys(j, {"model", "n", "span", "sampling", "dimension", "seed"}, "synthetic");
  if (!j.contains("model")) throw SchemaError("synthetic.model is required");
  SyntheticSpec s;
  s.model = kernel_model_from_json(j.at("model"));
  if (j.contains("n")) s.n = count(j, "n", "synthetic");
  if (j.contains("span")) s.span = number(j, "span", "synthetic");
  if (j.contains("sampling")) {
    const auto m = text(j, "sampling", "synthetic");
    if (m != "even" && m != "uniform-random") throw SchemaError("synthetic.sampling must be 'even' or 'uniform-random'");
    s.random_times = m == "uniform-random";
  }
  if (j.contains("dimension")) s.dimension = count(j, "dimension", "synthetic");
  if (j.contains("seed")) s.seed = count(j, "seed", "synthetic");
  if (s.n < 2) throw SchemaError("synthetic.n must be >= 2");
  if (!(s.span > 0.0)) throw SchemaError("synthetic.span must be > 0");
  if (s.dimension < 1) throw SchemaError("synthetic.dimension must be >= 1");
  if (s.dimension > 1 && s.model.family().id != FamilyId::IsotropicSE) {
    throw SchemaError("multi-input synthetic data needs the IsotropicSE family");
  }
  return s;
}

EstimatorSpec estimator_from_json(const Json& j) {
  require_keys(j, {"method", "window", "segments", "overlap", "grid", "bin_width", "max_lag"}, "estimator");
  EstimatorSpec e;
  if (j.contains("method")) {
    e.method = text(j, "method", "estimator");
    if (e.method != "periodogram" && e.method != "bartlett" && e.method != "welch" && e.method != "covariance") {
      throw SchemaError("unknown estimator method '" + e.method + "'");
    }
  }
  if (e.method == "welch") e.window = Window::Hann;
  if (j.contains("window")) e.window = parse_window(text(j, "window", "estimator"));
  if (j.contains("segments")) e.segments = count(j, "segments", "estimator");
  if (j.contains("overlap")) e.overlap = number(j, "overlap", "estimator");
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    require_keys(g, {"min", "max", "points"}, "estimator.grid");
    if (g.contains("min")) e.grid_min = number(g, "min", "estimator.grid");
    if (g.contains("max")) e.grid_max = number(g, "max", "estimator.grid");
    if (g.contains("points")) e.grid_points = count(g, "points", "estimator.grid");
  }
  if (j.contains("bin_width")) e.bin_width = number(j, "bin_width", "estimator");
  if (j.contains("max_lag")) e.max_lag = number(j, "max_lag", "estimator");
  if (e.grid_points < 2) throw SchemaError("estimator.grid.points must be >= 2");
  if (e.segments < 1) throw SchemaError("estimator.segments must be >= 1");
  return e;
}

Json to_json(const EstimatorSpec& e) {
  Json j;
  j["method"] = e.method;
  j["window"] = std::string(to_string(e.window));
  if (e.method == "bartlett" || e.method == "welch") j["segments"] = e.segments;
  if (e.method == "welch") j["overlap"] = e.overlap;
  Json g;
  if (e.grid_min) g["min"] = *e.grid_min;
  if (e.grid_max) g["max"] = *e.grid_max;
  g["points"] = e.grid_points;
  j["grid"] = g;
  if (e.bin_width) j["bin_width"] = *e.bin_width;
  if (e.max_lag) j["max_lag"] = *e.max_lag;
  return j;
}

TimeSeries draw_series(const SyntheticSpec& spec) {
  if (spec.random_times) return sample_gp_random_times(spec.model, spec.n, spec.span, spec.seed);
  return sample_gp_lattice(spec.model, spec.n, spec.span / static_cast<double>(spec.n - 1), spec.seed);
}

PointCloudSeries draw_cloud(const SyntheticSpec& spec) {
  PointCloudSeries pc;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u(0.0, spec.span);
  pc.locations.resize(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(spec.dimension));
  for (Eigen::Index i = 0; i < pc.locations.rows(); ++i) {
    for (Eigen::Index d = 0; d < pc.locations.cols(); ++d) pc.locations(i, d) = u(rng);
  }
  const auto y = sample_gp(spec.model, pc.locations, spec.seed + 1);
  pc.values.assign(y.data(), y.data() + y.size());
  return pc;
}

DataSet load_data(const Json& cfg, const Overrides& ov) {
  DataSet d;
  const bool has_input = cfg.contains("input");
  const bool has_synth = cfg.contains("synthetic");
  if (has_input == has_synth) throw SchemaError("config needs exactly one of 'input' or 'synthetic'");
  if (has_input) {
    if (!cfg.at("input").is_string()) throw SchemaError("input must be a path string");
    const auto path = cfg.at("input").get<std::string>();
    std::string kind = "time_series";
    if (cfg.contains("input_kind")) kind = text(cfg, "input_kind", "config");
    if (kind == "time_series") {
      d.series = read_time_series_csv(path);
    } else if (kind == "point_cloud") {
      d.cloud = read_point_cloud_csv(path);
    } else {
      throw SchemaError("input_kind must be 'time_series' or 'point_cloud'");
    }
    return d;
  }
  auto spec = synthetic_from_json(cfg.at("synthetic"));
  if (ov.seed) spec.seed = *ov.seed;
  if (spec.dimension > 1) {
    d.cloud = draw_cloud(spec);
  } else {
    d.series = draw_series(spec);
  }
  return d;
}

std::vector<double> frequency_grid(const TimeSeries& ts, const EstimatorSpec& e) {
  validate_series(ts);
  const double lo = e.grid_min.value_or(1.0 / ts.span());
  const double hi = e.grid_max.value_or(nyquist_estimate(ts));
  if (!(hi > lo) || lo < 0.0) throw SchemaError("estimator grid needs 0 <= min < max");
  return linear_grid(lo, hi, e.grid_points);
}

SpectralEstimate estimate_spectrum(const TimeSeries& ts, const EstimatorSpec& e) {
  if (e.method == "covariance") {
    const auto cov = estimate_covariance(ts, e);
    std::vector<double> grid;
    if (e.grid_min || e.grid_max) {
      const double lo = e.grid_min.value_or(1.0 / cov.lag_centers.back());
      const double hi = e.grid_max.value_or(0.5 / cov.bin_width);
      grid = linear_grid(lo, hi, e.grid_points);
    } else {
      grid = default_covariance_grid(cov, e.grid_points);
    }
    return psd_from_covariance(cov, grid);
  }
  const auto grid = frequency_grid(ts, e);
  if (e.method == "bartlett") return bartlett(ts, grid, e.segments, e.window);
  if (e.method == "welch") return welch(ts, grid, e.segments, e.overlap, e.window);
  return periodogram(ts, grid, e.window);
}

EmpiricalCovariance estimate_covariance(const TimeSeries& ts, const EstimatorSpec& e) {
  validate_series(ts);
  const double w = e.bin_width.value_or(median_gap(ts.times));
  const double max_lag = e.max_lag.value_or(ts.span());
  return empirical_covariance(ts, w, max_lag);
}

}  // namespace gvm::cli
