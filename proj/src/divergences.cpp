#include "gvm/divergences.hpp"

#include <algorithm>
#include <cmath>

#include "gvm/error.hpp"
#include "gvm/quantile.hpp"

namespace gvm {

namespace {

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::L1: return "l1";
    case Metric::L2: return "l2";
    case Metric::W1: return "w1";
    case Metric::W2: return "w2";
    case Metric::KL: return "kl";
    case Metric::IS: return "is";
  }
  return "?";
}

double max_of(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

}  // namespace

std::string to_string(DivergenceId id) {
  return std::string(id.domain == Domain::Temporal ? "time:" : "freq:") + std::string(metric_name(id.metric));
}

bool is_valid(DivergenceId id) {
  return id.domain == Domain::Spectral || id.metric == Metric::L1 || id.metric == Metric::L2;
}

DivergenceId parse_divergence(std::string_view s) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) throw SchemaError("divergence must look like 'time:l2' or 'freq:w2'");
  const auto dom = s.substr(0, colon);
  const auto met = s.substr(colon + 1);
  DivergenceId id;
  if (dom == "time") {
    id.domain = Domain::Temporal;
  } else if (dom == "freq") {
    id.domain = Domain::Spectral;
  } else {
    throw SchemaError("unknown divergence domain '" + std::string(dom) + "'");
  }
  bool found = false;
  for (auto m : {Metric::L1, Metric::L2, Metric::W1, Metric::W2, Metric::KL, Metric::IS}) {
    if (met == metric_name(m)) {
      id.metric = m;
      found = true;
    }
  }
  if (!found) throw SchemaError("unknown divergence '" + std::string(met) + "'");
  if (!is_valid(id)) throw SchemaError("divergence '" + std::string(s) + "' is only defined on spectra");
  return id;
}

double trapezoid(std::span<const double> x, std::span<const double> f) {
  if (x.size() != f.size()) throw DomainError("grid and values differ in length");
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (f[i] + f[i - 1]) * (x[i] - x[i - 1]);
  return s;
}

double divergence(Metric m, std::span<const double> grid, std::span<const double> a, std::span<const double> b,
                  const DivergenceOptions& opt) {
  if (a.size() != grid.size() || b.size() != grid.size()) throw DomainError("inputs must share the grid");
  const std::size_t n = grid.size();
  std::vector<double> f(n);
  switch (m) {
    case Metric::L1:
      for (std::size_t i = 0; i < n; ++i) f[i] = std::abs(a[i] - b[i]);
      return trapezoid(grid, f);
    case Metric::L2:
      for (std::size_t i = 0; i < n; ++i) f[i] = (a[i] - b[i]) * (a[i] - b[i]);
      return trapezoid(grid, f);
    case Metric::W1:
      return wasserstein1(quantile_from_grid(grid, a), quantile_from_grid(grid, b));
    case Metric::W2:
      return wasserstein2_squared(quantile_from_grid(grid, a), quantile_from_grid(grid, b));
    case Metric::KL:
    case Metric::IS: {
      const double eps = opt.floor_rel * max_of(b);
      for (std::size_t i = 0; i < n; ++i) {
        if (a[i] < 0.0 || b[i] < 0.0) throw DomainError("KL/IS need nonnegative densities");
        const bool a_zero = a[i] <= 0.0;
        const bool b_zero = b[i] <= 0.0;
        if (eps <= 0.0 && b_zero && !(m == Metric::KL && a_zero)) {
          throw DomainError("support of the estimate is not contained in the support of the model");
        }
        if (eps <= 0.0 && m == Metric::IS && a_zero) throw DomainError("Itakura-Saito needs a > 0");
        const double bb = std::max(b[i], eps);
        if (m == Metric::KL) {
          f[i] = a_zero ? bb : a[i] * std::log(a[i] / bb) - a[i] + bb;
        } else {
          const double aa = std::max(a[i], eps);
          const double r = aa / bb;
          f[i] = r - std::log(r) - 1.0;
        }
        f[i] = std::max(0.0, f[i]);
      }
      return trapezoid(grid, f);
    }
  }
  return 0.0;
}

double divergence(DivergenceId id, std::span<const double> grid, std::span<const double> a, std::span<const double> b,
                  const DivergenceOptions& opt) {
  if (!is_valid(id)) throw DomainError("divergence " + to_string(id) + " is not valid in the temporal domain");
  return divergence(id.metric, grid, a, b, opt);
}

std::vector<double> temporal_residuals(const KernelModel& model, const EmpiricalCovariance& cov) {
  auto k = eval_kernel(model, cov.lag_centers);
  for (std::size_t i = 0; i < k.size(); ++i) k[i] -= cov.estimates[i];
  return k;
}

double temporal_loss(const KernelModel& model, const EmpiricalCovariance& cov, Metric m) {
  if (m != Metric::L1 && m != Metric::L2) throw DomainError("temporal loss supports l1 and l2 only");
  const auto r = temporal_residuals(model, cov);
  std::vector<double> f(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) f[i] = m == Metric::L1 ? std::abs(r[i]) : r[i] * r[i];
  return trapezoid(cov.lag_centers, f);
}

double spectral_loss(const KernelModel& model, const SpectralEstimate& s, DivergenceId id, const DivergenceOptions& opt) {
  if (id.domain != Domain::Spectral) throw DomainError("spectral_loss needs a spectral divergence");
  const auto b = eval_psd(model, s.freqs);
  return divergence(id, s.freqs, s.psd, b, opt);
}

}  // namespace gvm
