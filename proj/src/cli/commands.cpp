#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <numeric>
#include <random>
#include <thread>

#include "CLI11.hpp"

#include "gvm/cli.hpp"
#include "gvm/error.hpp"
#include "gvm/gp.hpp"
#include "gvm/io.hpp"

namespace gvm::cli {

namespace {

using Clock = std::chrono::steady_clock;

std::string prepare_out_dir(const Overrides& ov) {
  std::error_code ec;
  std::filesystem::create_directories(ov.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + ov.out_dir + "': " + ec.message());
  return ov.out_dir;
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

Json section(const Json& cfg, const char* key) {
  return cfg.contains(key) ? cfg.at(key) : Json::object();
}

bool flag(const Json& cfg, const char* key) {
  if (!cfg.contains(key)) return false;
  if (!cfg.at(key).is_boolean()) throw SchemaError(std::string(key) + " must be a boolean");
  return cfg.at(key).get<bool>();
}

CsvTable three_columns(const char* x, const char* a, const char* b, std::vector<double> cx, std::vector<double> ca,
                       std::vector<double> cb) {
  CsvTable t;
  t.header = {x, a, b};
  t.columns = {std::move(cx), std::move(ca), std::move(cb)};
  return t;
}

void write_cov_fit(const std::string& path, const EmpiricalCovariance& cov, const KernelModel& model) {
  write_csv(path, three_columns("lag", "empirical", "fitted", cov.lag_centers, cov.estimates,
                                eval_kernel(model, cov.lag_centers)));
}

void write_psd_fit(const std::string& path, const SpectralEstimate& s, const KernelModel& model) {
  write_csv(path, three_columns("freq", "empirical", "fitted", s.freqs, s.psd, eval_psd(model, s.freqs)));
}

double sample_variance(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

Json ml_section(const FitResult& gvm, const TimeSeries& ts, const Json& ml_cfg) {
  require_keys(ml_cfg, {"max_iters", "init_noise"}, "ml");
  MlOptions opt;
  if (ml_cfg.contains("max_iters")) {
    if (!ml_cfg.at("max_iters").is_number_integer()) throw SchemaError("ml.max_iters must be an integer");
    opt.max_iters = ml_cfg.at("max_iters").get<int>();
  }
  // Spectral fits carry no noise; the likelihood needs some.
  double noise = gvm.model.noise_variance();
  if (ml_cfg.contains("init_noise")) {
    if (!ml_cfg.at("init_noise").is_number()) throw SchemaError("ml.init_noise must be a number");
    noise = ml_cfg.at("init_noise").get<double>();
  } else if (!(noise > 0.0)) {
    noise = 0.1 * sample_variance(ts.values);
  }
  const auto init = gvm.model.with_noise(noise);
  const auto ml = ml_refine(init, ts, opt);
  Json j;
  j["gvm_theta"] = init.theta();
  j["gvm_noise_variance"] = noise;
  j["gvm_nll"] = ml.diagnostics.get("init_nll");
  j["ml_theta"] = ml.theta_star;
  j["ml_noise_variance"] = ml.noise_variance;
  j["ml_nll"] = ml.diagnostics.get("final_nll");
  j["diverged"] = ml.diagnostics.get("diverged") != 0.0;
  j["iterations"] = ml.iterations;
  j["evaluations"] = ml.evaluations;
  j["model"] = to_json(ml.model);
  return j;
}

struct RunOutcome {
  bool ok = false;
  std::uint64_t seed = 0;
  double true_location = 0.0, true_scale = 0.0, true_power = 0.0;
  double est_location = NAN, est_scale = NAN, est_power = NAN;
  std::string error;
};

double pre(double truth, double est) { return 100.0 * std::abs(truth - est) / std::abs(truth); }

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {NAN, NAN};
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0};
}

std::pair<double, double> prior_range(const Json& priors, const char* key, std::pair<double, double> fallback) {
  if (!priors.contains(key)) return fallback;
  const auto& v = priors.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw SchemaError(std::string("priors.") + key + " must be [lo, hi]");
  }
  const double lo = v[0].get<double>(), hi = v[1].get<double>();
  if (!(lo > 0.0) || !(hi >= lo)) throw SchemaError(std::string("priors.") + key + " needs 0 < lo <= hi");
  return {lo, hi};
}

}  // namespace

Json cmd_fit(const Json& cfg, const Overrides& ov) {
  require_keys(cfg, {"input", "input_kind", "synthetic", "estimator", "fit", "refine_ml", "ml"}, "fit config");
  FitConfig fc = fit_config_from_json(section(cfg, "fit"));
  if (ov.seed) fc.seed = *ov.seed;
  const auto est = estimator_from_json(section(cfg, "estimator"));
  const bool refine = ov.refine_ml || flag(cfg, "refine_ml");
  const auto dir = prepare_out_dir(ov);
  const auto data = load_data(cfg, ov);
  if (refine && data.cloud) throw SchemaError("ML refinement is only available for time series input");

  Json out;
  out["command"] = "fit";
  out["fit"] = to_json(fc);
  out["estimator"] = to_json(est);
  FitResult r;
  if (data.cloud) {
    const auto cov = radial_empirical_covariance(*data.cloud);
    r = fit_isotropic(cov, fc);
    write_cov_fit(join(dir, "cov_fit.csv"), cov, r.model);
    out["n"] = data.cloud->size();
    out["dimension"] = data.cloud->dimension();
  } else {
    const auto& ts = *data.series;
    out["n"] = ts.size();
    if (fc.divergence.domain == Domain::Spectral) {
      const auto s = estimate_spectrum(ts, est);
      r = fit_general(s, fc);
      for (const auto& w : s.diagnostics.warnings) r.diagnostics.warn(w);
      if (s.diagnostics.has("clipped_mass")) r.diagnostics.set("clipped_mass", s.diagnostics.get("clipped_mass"));
      if (r.success) write_psd_fit(join(dir, "psd_fit.csv"), s, r.model);
      if (r.success) write_cov_fit(join(dir, "cov_fit.csv"), estimate_covariance(ts, est), r.model);
    } else {
      const auto cov = estimate_covariance(ts, est);
      r = fit_general(cov, fc);
      write_cov_fit(join(dir, "cov_fit.csv"), cov, r.model);
      EstimatorSpec plot = est;
      if (plot.method == "covariance") plot.method = "periodogram";
      write_psd_fit(join(dir, "psd_fit.csv"), estimate_spectrum(ts, plot), r.model.with_noise(0.0));
    }
    if (refine) {
      if (!r.success) throw DomainError("cannot refine a failed fit");
      out["ml"] = ml_section(r, ts, section(cfg, "ml"));
    }
  }
  out["result"] = to_json(r);
  write_json(join(dir, "result.json"), out);
  if (!r.success) {
    const std::string why = r.diagnostics.warnings.empty() ? "no admissible model" : r.diagnostics.warnings.front();
    throw DegenerateSpectrumError("fit failed: " + why);
  }
  return out;
}

Json cmd_sample(const Json& cfg, const Overrides& ov) {
  require_keys(cfg, {"synthetic"}, "sample config");
  if (!cfg.contains("synthetic")) throw SchemaError("sample config needs 'synthetic'");
  const auto dir = prepare_out_dir(ov);
  const auto data = load_data(cfg, ov);
  const auto path = join(dir, "samples.csv");
  Json out;
  out["command"] = "sample";
  if (data.cloud) {
    write_point_cloud_csv(path, *data.cloud);
    out["n"] = data.cloud->size();
    out["dimension"] = data.cloud->dimension();
  } else {
    write_time_series_csv(path, *data.series);
    out["n"] = data.series->size();
  }
  out["file"] = "samples.csv";
  write_json(join(dir, "sample.json"), out);
  return out;
}

Json cmd_estimate(const Json& cfg, const Overrides& ov) {
  require_keys(cfg, {"input", "input_kind", "synthetic", "estimator"}, "estimate config");
  const auto est = estimator_from_json(section(cfg, "estimator"));
  const auto dir = prepare_out_dir(ov);
  const auto data = load_data(cfg, ov);
  Json out;
  out["command"] = "estimate";
  out["estimator"] = to_json(est);
  if (data.cloud) {
    const auto cov = radial_empirical_covariance(*data.cloud);
    write_covariance_csv(join(dir, "covariance.csv"), cov);
    out["bins"] = cov.size();
  } else {
    const auto& ts = *data.series;
    const auto s = estimate_spectrum(ts, est);
    write_spectrum_csv(join(dir, "spectrum.csv"), s);
    out["total_mass"] = s.total_mass;
    out["diagnostics"] = to_json(s.diagnostics);
    if (est.method == "covariance") {
      const auto cov = estimate_covariance(ts, est);
      write_covariance_csv(join(dir, "covariance.csv"), cov);
      out["bins"] = cov.size();
    }
  }
  write_json(join(dir, "estimate.json"), out);
  return out;
}

Json cmd_benchmark(const Json& cfg, const Overrides& ov) {
  require_keys(cfg, {"n", "model", "dt", "grid_points", "repeats", "ml", "ml_cap", "seed"}, "benchmark config");
  if (!cfg.contains("n") || !cfg.at("n").is_array() || cfg.at("n").empty()) {
    throw SchemaError("benchmark needs a non-empty list 'n'");
  }
  std::vector<std::size_t> sizes;
  for (const auto& v : cfg.at("n")) {
    if (!v.is_number_integer() || v.get<long long>() < 16) throw SchemaError("benchmark sizes must be integers >= 16");
    sizes.push_back(v.get<std::size_t>());
  }
  const KernelModel model = cfg.contains("model")
                                ? kernel_model_from_json(cfg.at("model"))
                                : KernelModel(KernelFamily{FamilyId::ExpCos, 1},
                                              {{1.0 / (0.01 * std::sqrt(std::numbers::pi)), 0.05, 0.01}}, 0.1);
  const double dt = cfg.value("dt", 0.25);
  const std::size_t k = cfg.value("grid_points", std::size_t{500});
  const int repeats = cfg.value("repeats", 3);
  const bool with_ml = cfg.value("ml", true);
  const std::size_t cap = cfg.value("ml_cap", kDefaultGpCap);
  std::uint64_t seed = cfg.value("seed", std::uint64_t{0});
  if (ov.seed) seed = *ov.seed;
  if (!(dt > 0.0) || k < 2 || repeats < 1) throw SchemaError("benchmark needs dt > 0, grid_points >= 2, repeats >= 1");
  const auto dir = prepare_out_dir(ov);

  CsvTable table;
  table.header = {"n", "gvm_elapsed", "ml_elapsed"};
  table.columns.resize(3);
  Json rows = Json::array();
  const bool exact = is_location_scale(model.family().id);
  for (std::size_t n : sizes) {
    const auto ts = sample_gp_lattice(model, n, dt, seed + n);
    double best = INFINITY;
    for (int rep = 0; rep < repeats; ++rep) {
      const auto t0 = Clock::now();
      const auto s = periodogram(ts, default_frequency_grid(ts, k));
      if (exact) {
        fit_w2_location_scale(s, KernelFamily{model.family().id, 1});
      } else {
        FitConfig fc;
        fc.family = model.family();
        fc.optimizer = Optimizer::NelderMead;
        fit_general(s, fc);
      }
      best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
    }
    double ml = NAN;
    Json row{{"n", n}, {"gvm_elapsed", best}};
    if (with_ml && n <= cap) {
      // One likelihood evaluation: the O(n^3) factorization every ML iteration pays.
      const auto t0 = Clock::now();
      nll(model, ts, cap);
      ml = std::chrono::duration<double>(Clock::now() - t0).count();
      row["ml_elapsed"] = ml;
    } else {
      row["ml_elapsed"] = nullptr;
      row["ml_status"] = with_ml ? "skipped: n exceeds cap" : "disabled";
    }
    table.columns[0].push_back(static_cast<double>(n));
    table.columns[1].push_back(best);
    table.columns[2].push_back(ml);
    rows.push_back(row);
  }
  write_csv(join(dir, "benchmark.csv"), table);
  Json out;
  out["command"] = "benchmark";
  out["rows"] = rows;
  write_json(join(dir, "benchmark.json"), out);
  return out;
}

Json cmd_recover(const Json& cfg, const Overrides& ov) {
  require_keys(cfg, {"family", "runs", "n", "span", "sampling", "priors", "power", "noise_variance", "estimator", "fit",
                     "seed", "threads"},
               "recover config");
  if (!cfg.contains("runs") || !cfg.at("runs").is_number_integer() || cfg.at("runs").get<long long>() < 1) {
    throw SchemaError("recover needs runs >= 1");
  }
  const auto runs = cfg.at("runs").get<std::size_t>();
  const FamilyId id = parse_family(cfg.value("family", std::string("ExpCos")));
  if (!is_location_scale(id)) throw SchemaError("recover supports ExpCos and Sinc");
  const std::size_t n = cfg.value("n", std::size_t{4000});
  const double span = cfg.value("span", 1000.0);
  const std::string sampling = cfg.value("sampling", std::string("even"));
  if (sampling != "even" && sampling != "uniform-random") throw SchemaError("sampling must be 'even' or 'uniform-random'");
  const Json priors = section(cfg, "priors");
  require_keys(priors, {"location", "scale"}, "priors");
  const auto loc = prior_range(priors, "location", {0.025, 0.075});
  const auto sc = prior_range(priors, "scale", {0.01, 0.02});
  const double power = cfg.value("power", 1.0);
  const double noise = cfg.value("noise_variance", 0.0);
  const auto est = estimator_from_json(section(cfg, "estimator"));
  Json fit_json = section(cfg, "fit");
  if (!fit_json.contains("family")) fit_json["family"] = std::string(to_string(id));
  FitConfig fc = fit_config_from_json(fit_json);
  if (fc.divergence.domain != Domain::Spectral) throw SchemaError("recover fits spectra; use a freq: divergence");
  std::uint64_t seed = cfg.value("seed", std::uint64_t{0});
  if (ov.seed) seed = *ov.seed;
  std::size_t threads = cfg.value("threads", std::size_t{0});
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, runs);
  if (n < 2 || !(span > 0.0) || !(power > 0.0) || noise < 0.0) throw SchemaError("recover needs n >= 2, span > 0, power > 0, noise >= 0");
  const auto dir = prepare_out_dir(ov);
  const auto t0 = Clock::now();

  std::vector<RunOutcome> outcomes(runs);
  auto one = [&](std::size_t i) {
    RunOutcome& o = outcomes[i];
    o.seed = seed + i;
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> ul(loc.first, loc.second), us(sc.first, sc.second);
    o.true_location = ul(rng);
    o.true_scale = us(rng);
    o.true_power = power;
    try {
      const KernelModel truth(KernelFamily{id, 1},
                              {{magnitude_for_power(id, power, o.true_scale), o.true_location, o.true_scale}}, noise);
      SyntheticSpec spec;
      spec.model = truth;
      spec.n = n;
      spec.span = span;
      spec.random_times = sampling == "uniform-random";
      spec.seed = o.seed;
      const auto s = estimate_spectrum(draw_series(spec), est);
      const auto r = fit_general(s, fc);
      if (!r.success) throw DomainError("solver reported failure");
      const auto& c = r.model.components().front();
      o.est_location = c.location;
      o.est_scale = c.scale;
      o.est_power = r.model.power();
      o.ok = true;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < runs; i += threads) one(i);
    });
  }
  for (auto& t : pool) t.join();

  CsvTable detail;
  detail.header = {"seed",         "true_location", "true_scale",   "est_location", "est_scale",
                   "est_power",    "pre_location",  "pre_scale",    "pre_power",    "ok"};
  detail.columns.resize(detail.header.size());
  std::vector<double> pl, ps, pp;
  std::size_t failures = 0;
  Json errors = Json::array();
  for (const auto& o : outcomes) {
    const double a = o.ok ? pre(o.true_location, o.est_location) : NAN;
    const double b = o.ok ? pre(o.true_scale, o.est_scale) : NAN;
    const double c = o.ok ? pre(o.true_power, o.est_power) : NAN;
    const double row[] = {static_cast<double>(o.seed), o.true_location, o.true_scale, o.est_location, o.est_scale,
                          o.est_power, a, b, c, o.ok ? 1.0 : 0.0};
    for (std::size_t k = 0; k < detail.columns.size(); ++k) detail.columns[k].push_back(row[k]);
    if (o.ok) {
      pl.push_back(a);
      ps.push_back(b);
      pp.push_back(c);
    } else {
      ++failures;
      errors.push_back({{"seed", o.seed}, {"error", o.error}});
    }
  }
  write_csv(join(dir, "recovery_runs.csv"), detail);

  const auto [ml_, sl] = mean_std(pl);
  const auto [ms, ss] = mean_std(ps);
  const auto [mp, sp] = mean_std(pp);
  CsvTable summary;
  summary.header = {"runs", "failures", "mean_pre_location", "std_pre_location", "mean_pre_scale",
                    "std_pre_scale", "mean_pre_power", "std_pre_power"};
  for (double v : {static_cast<double>(runs), static_cast<double>(failures), ml_, sl, ms, ss, mp, sp}) {
    summary.columns.push_back({v});
  }
  write_csv(join(dir, "summary.csv"), summary);

  Json out;
  out["command"] = "recover";
  out["family"] = std::string(to_string(id));
  out["runs"] = runs;
  out["failures"] = failures;
  out["pre"] = {{"location", {{"mean", ml_}, {"std", sl}}},
                {"scale", {{"mean", ms}, {"std", ss}}},
                {"power", {{"mean", mp}, {"std", sp}}}};
  out["estimator"] = to_json(est);
  out["fit"] = to_json(fc);
  if (!errors.empty()) out["errors"] = errors;
  out["timing"] = {{"elapsed", std::chrono::duration<double>(Clock::now() - t0).count()}};
  write_json(join(dir, "recover.json"), out);
  return out;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const SchemaError*>(&e)) return 1;
  if (dynamic_cast<const IoError*>(&e)) return 2;
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return 1;
  return 3;
}

int run(int argc, char** argv) {
  CLI::App app{"Generalised variogram fitting of GP kernels"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  Overrides ov;

  struct Verb {
    const char* name;
    const char* help;
    Json (*fn)(const Json&, const Overrides&);
  };
  const Verb verbs[] = {
      {"fit", "estimate, fit and write result.json, psd_fit.csv, cov_fit.csv", cmd_fit},
      {"sample", "draw synthetic data to samples.csv", cmd_sample},
      {"estimate", "write an empirical spectrum or covariance", cmd_estimate},
      {"benchmark", "time GVM and exact likelihood across n", cmd_benchmark},
      {"recover", "repeat sample/estimate/fit and summarize relative errors", cmd_recover},
  };
  std::vector<CLI::App*> subs;
  for (const auto& v : verbs) {
    auto* sub = app.add_subcommand(v.name, v.help);
    sub->add_option("--config", config_path, "JSON config")->required();
    sub->add_option("--seed", seed, "override the seed");
    sub->add_option("--out-dir", ov.out_dir, "output directory");
    if (std::string_view(v.name) == "fit") sub->add_flag("--refine-ml", ov.refine_ml, "refine with exact likelihood");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  ov.seed = seed;
  try {
    const Json cfg = load_config(config_path);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subs[i]->parsed()) {
        const Json out = verbs[i].fn(cfg, ov);
        std::cout << out.dump(2) << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  }
  return 0;
}

}  // namespace gvm::cli
