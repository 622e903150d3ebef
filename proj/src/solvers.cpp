#include "gvm/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "gvm/error.hpp"
#include "gvm/estimators.hpp"
#include "gvm/optimize.hpp"
#include "transform.hpp"

namespace gvm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Antiderivatives of Q01 and Q01^2 at each cell boundary of q.
struct CellIntegrals {
  std::vector<double> i1;
  std::vector<double> i2;
};

CellIntegrals cell_integrals(const QuantileTable& q, Prototype proto) {
  CellIntegrals out;
  out.i1.resize(q.cells());
  out.i2.resize(q.cells());
  double g1_lo = prototype_quantile_integral(proto, 0.0, 0.0);
  double g2_lo = 0.0;
  for (std::size_t i = 0; i < q.cells(); ++i) {
    const double hi = q.cdf()[i];
    const double g1_hi = prototype_quantile_integral(proto, 0.0, hi);
    const double g2_hi = prototype_quantile_sq_integral(proto, 0.0, hi);
    out.i1[i] = g1_hi - g1_lo;
    out.i2[i] = g2_hi - g2_lo;
    g1_lo = g1_hi;
    g2_lo = g2_hi;
  }
  return out;
}

double w2_cells(const QuantileTable& q, const CellIntegrals& ci, double mu, double sigma) {
  double acc = 0.0;
  for (std::size_t i = 0; i < q.cells(); ++i) {
    const double d = q.values()[i] - mu;
    const double len = q.cdf()[i] - q.cell_lo(i);
    acc += d * d * len - 2.0 * sigma * d * ci.i1[i] + sigma * sigma * ci.i2[i];
  }
  return std::max(0.0, acc);
}

struct LocScaleMoments {
  double mu = 0.0;
  double cross = 0.0;  // int Q Q01
};

LocScaleMoments moments(const QuantileTable& q, const CellIntegrals& ci) {
  LocScaleMoments m;
  for (std::size_t i = 0; i < q.cells(); ++i) {
    m.mu += q.values()[i] * (q.cdf()[i] - q.cell_lo(i));
    m.cross += q.values()[i] * ci.i1[i];
  }
  return m;
}

KernelFamily checked_family(const KernelFamily& f) {
  if (!is_mixture(f.id) && f.component_count != 1) {
    throw SchemaError(std::string(to_string(f.id)) + " has exactly one component");
  }
  if (f.component_count < 1) throw SchemaError("component_count must be >= 1");
  return f;
}

}  // namespace

std::string_view to_string(Optimizer o) {
  switch (o) {
    case Optimizer::Exact: return "exact";
    case Optimizer::NelderMead: return "nelder-mead";
    case Optimizer::Powell: return "powell";
  }
  return "?";
}

Optimizer parse_optimizer(std::string_view s) {
  if (s == "exact") return Optimizer::Exact;
  if (s == "nelder-mead") return Optimizer::NelderMead;
  if (s == "powell") return Optimizer::Powell;
  throw SchemaError("unknown optimizer '" + std::string(s) + "'");
}

void validate(const FitConfig& cfg) {
  checked_family(cfg.family);
  if (!is_valid(cfg.divergence)) throw SchemaError("invalid divergence " + to_string(cfg.divergence));
  if (cfg.optimizer == Optimizer::Exact &&
      !(cfg.divergence == DivergenceId{Domain::Spectral, Metric::W2} && is_location_scale(cfg.family.id))) {
    throw SchemaError("the exact solver needs freq:w2 and a location-scale family (ExpCos or Sinc)");
  }
  if (cfg.max_iters < 1) throw SchemaError("max_iters must be >= 1");
  if (!(cfg.tolerance > 0.0)) throw SchemaError("tolerance must be > 0");
  if (cfg.init) {
    const auto per = params_per_component(cfg.family.id);
    if (cfg.init->size() != per * cfg.family.component_count) throw SchemaError("init has the wrong length");
  }
}

double w2_to_location_scale(const QuantileTable& q, Prototype proto, double mu, double sigma) {
  return w2_cells(q, cell_integrals(q, proto), mu, sigma);
}

FitResult fit_w2_location_scale(const SpectralEstimate& s, const KernelFamily& family) {
  const auto t0 = Clock::now();
  if (!is_location_scale(family.id)) throw DomainError("exact W2 solver needs ExpCos or Sinc");
  const Prototype proto = prototype_of(family.id);
  const auto q = quantile_from_spectrum(s);
  const auto ci = cell_integrals(q, proto);
  const auto m = moments(q, ci);
  const double second = prototype_second_moment(proto);
  const double mu = m.mu;
  const double sigma = m.cross / second;
  const double power = q.mass();

  FitResult r;
  r.divergence = "freq:w2";
  r.optimizer = "exact";
  r.iterations = 1;
  r.evaluations = 1;
  r.diagnostics.set("mu", mu);
  r.diagnostics.set("sigma", sigma);
  r.diagnostics.set("total_mass", power);
  r.diagnostics.set("normalization", 1.0 / power);
  r.diagnostics.set("int_q_q01", m.cross);
  r.diagnostics.set("int_q01_sq", second);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    r.success = false;
    r.converged = false;
    r.theta_star = {0.0, mu, sigma};
    r.loss = w2_cells(q, ci, mu, sigma);
    r.diagnostics.warn("non-positive scale from the exact solver; use the general solver instead");
    r.elapsed = seconds_since(t0);
    return r;
  }
  const double magnitude = magnitude_for_power(family.id, power, sigma);
  r.model = KernelModel(KernelFamily{family.id, 1}, {Component{magnitude, mu, sigma}});
  r.theta_star = r.model.theta();
  r.diagnostics.set("recovered_magnitude", magnitude);
  r.loss = w2_cells(q, ci, mu, sigma);
  r.loss_history = {r.loss};
  r.elapsed = seconds_since(t0);
  return r;
}

std::vector<double> initialize_mixture(const SpectralEstimate& s, std::size_t components, FamilyId family) {
  if (components < 1) throw DomainError("components must be >= 1");
  const auto& f = s.freqs;
  const auto& p = s.psd;
  const std::size_t n = f.size();
  if (n < 2) throw DomainError("spectrum needs at least two bins");
  const auto w = grid_cell_widths(f);
  const double total = spectral_mass(f, p);
  if (!(total > 0.0)) throw DegenerateSpectrumError("spectrum has zero total mass");
  const Prototype proto = prototype_of(family);

  struct Peak {
    std::size_t j;
    double height;
    double mass;
    double left;
    double right;
  };
  std::vector<Peak> peaks;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(p[j] > 0.0)) continue;
    const bool ge_left = j == 0 || p[j] >= p[j - 1];
    const bool ge_right = j + 1 == n || p[j] >= p[j + 1];
    const bool gt_one = (j > 0 && p[j] > p[j - 1]) || (j + 1 < n && p[j] > p[j + 1]);
    if (!(ge_left && ge_right && gt_one)) continue;
    const double half = 0.5 * p[j];
    std::size_t lo = j;
    std::size_t hi = j;
    while (lo > 0 && p[lo - 1] > half) --lo;
    while (hi + 1 < n && p[hi + 1] > half) ++hi;
    double xl = f[lo];
    double xr = f[hi];
    if (lo > 0) xl = f[lo - 1] + (half - p[lo - 1]) / (p[lo] - p[lo - 1]) * (f[lo] - f[lo - 1]);
    if (hi + 1 < n) xr = f[hi] + (p[hi] - half) / (p[hi] - p[hi + 1]) * (f[hi + 1] - f[hi]);
    double mass = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) mass += p[k] * w[k];
    peaks.push_back({j, p[j], mass, xl, xr});
  }
  std::sort(peaks.begin(), peaks.end(), [&](const Peak& a, const Peak& b) {
    if (a.height != b.height) return a.height > b.height;
    if (a.mass != b.mass) return a.mass > b.mass;
    return f[a.j] < f[b.j];
  });

  std::vector<Component> picked;
  std::vector<std::pair<double, double>> taken;
  double picked_mass = 0.0;
  const double min_width = *std::min_element(w.begin(), w.end());
  for (const auto& pk : peaks) {
    if (picked.size() == components) break;
    const double loc = f[pk.j];
    bool suppressed = false;
    for (auto [a, b] : taken) suppressed = suppressed || (loc >= a && loc <= b);
    if (suppressed) continue;
    const double fwhm = std::max(pk.right - pk.left, min_width);
    // exp(-x^2) falls to half at x = sqrt(ln 2); a rect is its own FWHM.
    const double sigma = proto == Prototype::Rect ? fwhm : fwhm / (2.0 * std::sqrt(std::log(2.0)));
    const double power = proto == Prototype::Rect ? pk.mass : pk.mass / std::erf(std::sqrt(std::log(2.0)));
    picked.push_back({magnitude_for_power(family, power, sigma), loc, sigma});
    taken.emplace_back(pk.left, pk.right);
    picked_mass += pk.mass;
  }
  const std::size_t rest = components - picked.size();
  if (rest > 0) {
    const double lo = f.front();
    const double span = f.back() - f.front();
    const double power = std::max(total - picked_mass, 0.01 * total) / static_cast<double>(rest);
    const double sigma = span / (2.0 * static_cast<double>(rest));
    for (std::size_t i = 0; i < rest; ++i) {
      const double loc = lo + (static_cast<double>(i) + 0.5) * span / static_cast<double>(rest);
      picked.push_back({magnitude_for_power(family, power, sigma), loc, sigma});
    }
  }
  std::stable_sort(picked.begin(), picked.end(), [](const Component& a, const Component& b) { return a.location < b.location; });
  std::vector<double> theta;
  for (const auto& c : picked) theta.insert(theta.end(), {c.magnitude, c.location, c.scale});
  return theta;
}

namespace {

// Lag at which the binned covariance first drops below exp(-1/2) of its first
// off-zero value; a crude SE lengthscale.
double crossing_lengthscale(const EmpiricalCovariance& cov) {
  const double ref = cov.estimates[1];
  const double target = std::exp(-0.5) * ref;
  for (std::size_t k = 1; k < cov.size(); ++k) {
    if (cov.estimates[k] < target) return std::max(cov.lag_centers[k], cov.bin_width);
  }
  return std::max(cov.lag_centers.back() / 10.0, cov.bin_width);
}

KernelModel model_from_spectrum(const SpectralEstimate& s, const KernelFamily& family, double power) {
  const FamilyId id = family.id;
  if (is_mixture(id)) {
    auto theta = initialize_mixture(s, family.component_count, id);
    auto m = KernelModel::from_theta(id, theta);
    const double scale = power / m.power();
    for (std::size_t i = 0; i < theta.size(); i += 3) theta[i] *= scale;
    return KernelModel::from_theta(id, theta);
  }
  if (is_location_scale(id)) {
    auto r = fit_w2_location_scale(s, KernelFamily{id, 1});
    double mu = r.diagnostics.get("mu");
    double sigma = r.diagnostics.get("sigma");
    if (!r.success) sigma = (s.freqs.back() - s.freqs.front()) / 10.0;
    return KernelModel(KernelFamily{id, 1}, {Component{magnitude_for_power(id, power, sigma), mu, sigma}});
  }
  if (id == FamilyId::Cosine) {
    const auto q = quantile_from_spectrum(s);
    return KernelModel(KernelFamily{id, 1}, {Component{power, q.mean(), 1.0}});
  }
  throw DomainError("no spectral initializer for " + std::string(to_string(id)));
}

FitResult run_iterative(const Objective& loss, const detail::Layout& layout, const KernelModel& init,
                        const FitConfig& cfg, Clock::time_point t0) {
  const auto x0 = detail::encode(init, layout);
  const double f0 = loss(x0);
  if (!std::isfinite(f0)) throw InitError("loss is not finite at the initial point");
  OptimizeOptions opt;
  opt.max_iters = cfg.max_iters;
  opt.max_evals = std::max(20 * cfg.max_iters, 1000);
  opt.tolerance = cfg.tolerance;
  const auto res = cfg.optimizer == Optimizer::Powell ? powell(loss, x0, opt) : nelder_mead(loss, x0, opt);

  FitResult r;
  r.model = detail::decode(res.x, layout);
  r.theta_star = r.model.theta();
  r.noise_variance = r.model.noise_variance();
  r.loss = res.f;
  r.iterations = res.iterations;
  r.evaluations = res.evaluations;
  r.converged = res.converged;
  r.loss_history = res.history;
  r.divergence = to_string(cfg.divergence);
  r.optimizer = std::string(to_string(cfg.optimizer));
  r.diagnostics.set("init_loss", f0);
  if (!res.converged) r.diagnostics.warn("iteration cap reached before convergence");
  r.elapsed = seconds_since(t0);
  return r;
}

}  // namespace

FitResult fit_general(const EmpiricalCovariance& cov, const FitConfig& cfg) {
  const auto t0 = Clock::now();
  validate(cfg);
  if (cfg.divergence.domain != Domain::Temporal) throw SchemaError("covariance data needs a temporal divergence");
  if (cov.size() < 2) throw InsufficientDataError("need at least two lag bins");
  const FamilyId id = cfg.family.id;
  const double k0 = cov.estimates[0];
  const double k1 = cov.estimates[1];

  double noise0 = cfg.init_noise.value_or(std::max(k0 - k1, 1e-3 * std::abs(k0)));
  if (!cfg.fit_noise) noise0 = cfg.init_noise.value_or(0.0);
  const double power0 = std::max(k0 - noise0, 1e-3 * std::abs(k0));

  KernelModel init = [&] {
    if (cfg.init) return KernelModel::from_theta(id, *cfg.init, noise0);
    if (id == FamilyId::IsotropicSE) {
      return KernelModel(KernelFamily{id, 1}, {Component{power0, 0.0, crossing_lengthscale(cov)}}, noise0);
    }
    const auto grid = default_covariance_grid(cov);
    const auto s = psd_from_covariance(cov, grid);
    return model_from_spectrum(s, KernelFamily{id, cfg.family.component_count}, power0).with_noise(noise0);
  }();
  if (cfg.fit_noise && !(init.noise_variance() > 0.0)) init = init.with_noise(1e-3 * std::max(std::abs(k0), 1e-12));

  const double loc_floor = 0.5 / cov.lag_centers.back();
  const auto layout = detail::make_layout(init, true, cfg.fit_noise, 0.0, loc_floor);
  const Metric metric = cfg.divergence.metric;
  Objective loss = [&](std::span<const double> x) { return temporal_loss(detail::decode(x, layout), cov, metric); };
  auto r = run_iterative(loss, layout, init, cfg, t0);
  r.diagnostics.set("noise_variance", r.noise_variance);
  r.diagnostics.set("recovered_magnitude", r.model.power());
  return r;
}

FitResult fit_general(const SpectralEstimate& s, const FitConfig& cfg) {
  const auto t0 = Clock::now();
  validate(cfg);
  if (cfg.divergence.domain != Domain::Spectral) throw SchemaError("spectral data needs a spectral divergence");
  if (cfg.optimizer == Optimizer::Exact) return fit_w2_location_scale(s, cfg.family);
  if (!(s.total_mass > 0.0)) throw DegenerateSpectrumError("spectrum has zero total mass");

  const FamilyId id = cfg.family.id;
  const double power = s.total_mass;
  const KernelModel init = cfg.init ? KernelModel::from_theta(id, *cfg.init)
                                    : model_from_spectrum(s, KernelFamily{id, cfg.family.component_count}, power);
  const bool horizontal = cfg.divergence.metric == Metric::W1 || cfg.divergence.metric == Metric::W2;
  const bool free_mag = !(horizontal && init.components().size() == 1);
  const double loc_floor = std::max(s.freqs.back() / 100.0, 1e-12);
  const auto layout = detail::make_layout(init, free_mag, false, power, loc_floor);
  const auto id_div = cfg.divergence;
  Objective loss = [&](std::span<const double> x) { return spectral_loss(detail::decode(x, layout), s, id_div); };
  auto r = run_iterative(loss, layout, init, cfg, t0);
  if (horizontal && free_mag) {
    // Only relative weights are identifiable under W1/W2; restore the empirical power.
    auto theta = r.model.theta();
    const double scale = power / r.model.power();
    const std::size_t per = params_per_component(id);
    for (std::size_t i = 0; i < theta.size(); i += per) theta[i] *= scale;
    r.model = KernelModel::from_theta(id, theta);
    r.theta_star = theta;
  }
  r.diagnostics.set("total_mass", power);
  r.diagnostics.set("recovered_magnitude", r.model.power());
  r.elapsed = seconds_since(t0);
  return r;
}

bool FirstOrderReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* FirstOrderReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

FirstOrderReport verify_first_order(const SpectralEstimate& s, const KernelFamily& family,
                                    std::span<const double> theta_star) {
  if (!is_location_scale(family.id)) throw DomainError("first-order check needs ExpCos or Sinc");
  if (theta_star.size() != 2 && theta_star.size() != 3) throw DomainError("theta_star must hold (mu, sigma)");
  const double mu = theta_star[theta_star.size() - 2];
  const double sigma = theta_star[theta_star.size() - 1];
  const Prototype proto = prototype_of(family.id);
  const auto q = quantile_from_spectrum(s);
  const auto ci = cell_integrals(q, proto);
  const auto m = moments(q, ci);
  const double second = prototype_second_moment(proto);
  const double base = w2_cells(q, ci, mu, sigma);

  FirstOrderReport rep;
  constexpr double kRel = 1e-3;
  auto perturb = [&](const std::string& name, double dmu, double dsig) {
    const double up = w2_cells(q, ci, mu + dmu, sigma + dsig);
    const double down = w2_cells(q, ci, mu - dmu, sigma - dsig);
    rep.checks.push_back({name, up > base && down > base, std::min(up, down) - base});
  };
  perturb("mu_perturbation", kRel * std::abs(mu), 0.0);
  perturb("sigma_perturbation", 0.0, kRel * std::abs(sigma));

  // Stationarity: mu = int Q and sigma int Q01^2 = int Q Q01.
  const double res_mu = std::abs(mu - m.mu) / std::max(std::abs(m.mu), 1e-300);
  const double res_sigma = std::abs(sigma * second - m.cross) / std::max(std::abs(m.cross), 1e-300);
  rep.checks.push_back({"mu_first_order", res_mu <= 1e-6, res_mu});
  rep.checks.push_back({"sigma_first_order", res_sigma <= 1e-6, res_sigma});
  return rep;
}

}  // namespace gvm
