#include "gvm/multiinput.hpp"

#include <algorithm>
#include <cmath>

#include "gvm/error.hpp"

namespace gvm {

void validate_point_cloud(const PointCloudSeries& pc) {
  if (static_cast<std::size_t>(pc.locations.rows()) != pc.values.size()) {
    throw DomainError("locations and values differ in length");
  }
  if (pc.values.size() < 2) throw InsufficientDataError("need at least two observations");
  if (pc.locations.cols() < 1) throw DomainError("need at least one input dimension");
  if (!pc.locations.allFinite()) throw DomainError("non-finite location");
  for (double v : pc.values) {
    if (!std::isfinite(v)) throw DomainError("non-finite value");
  }
}

double max_pairwise_distance(const PointCloudSeries& pc) {
  double m = 0.0;
  const Eigen::Index n = pc.locations.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) m = std::max(m, (pc.locations.row(i) - pc.locations.row(j)).squaredNorm());
  }
  return std::sqrt(m);
}

EmpiricalCovariance radial_empirical_covariance(const PointCloudSeries& pc, double bin_width, double max_radius,
                                                MeanHandling mean) {
  validate_point_cloud(pc);
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw DomainError("bin_width must be > 0");
  if (!(max_radius > 0.0) || !std::isfinite(max_radius)) throw DomainError("max_radius must be > 0");
  const std::size_t n = pc.size();
  double mu = 0.0;
  if (mean == MeanHandling::Subtract) {
    for (double v : pc.values) mu += v;
    mu /= static_cast<double>(n);
  }
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = pc.values[i] - mu;

  const auto nbins = static_cast<std::size_t>(std::llround(max_radius / bin_width)) + 1;
  std::vector<double> sum(nbins, 0.0);
  std::vector<std::int64_t> cnt(nbins, 0);
  // Column-major copy of rows for cache-friendly distance loops.
  const Eigen::MatrixXd pts = pc.locations.transpose();
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t j = i; j < n; ++j) {
      const double r = (pts.col(ii) - pts.col(static_cast<Eigen::Index>(j))).norm();
      if (r > max_radius) continue;
      std::size_t b = 0;
      if (j != i && r > 0.0) b = static_cast<std::size_t>(std::max<long long>(1, std::llround(r / bin_width)));
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
  if (out.size() < 2) throw InsufficientDataError("fewer than two non-empty distance bins");
  return out;
}

EmpiricalCovariance radial_empirical_covariance(const PointCloudSeries& pc) {
  validate_point_cloud(pc);
  const double max_radius = 0.5 * max_pairwise_distance(pc);
  if (!(max_radius > 0.0)) throw InsufficientDataError("all locations coincide");
  return radial_empirical_covariance(pc, max_radius / 30.0, max_radius);
}

FitResult fit_isotropic(const EmpiricalCovariance& radial, const FitConfig& cfg) {
  FitConfig c = cfg;
  c.family = KernelFamily{FamilyId::IsotropicSE, 1};
  if (c.optimizer == Optimizer::Exact) c.optimizer = Optimizer::NelderMead;
  if (c.divergence.domain != Domain::Temporal) throw SchemaError("isotropic fits use a temporal divergence");
  return fit_general(radial, c);
}

FitResult fit_isotropic(const PointCloudSeries& pc, const FitConfig& cfg) {
  return fit_isotropic(radial_empirical_covariance(pc), cfg);
}

}  // namespace gvm
