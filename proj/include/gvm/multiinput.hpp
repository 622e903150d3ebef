#pragma once

#include <Eigen/Dense>

#include "gvm/estimators.hpp"
#include "gvm/solvers.hpp"
#include "gvm/types.hpp"

namespace gvm {

/// n observations at the rows of an n x d location matrix.
struct PointCloudSeries {
  Eigen::MatrixXd locations;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  std::size_t dimension() const { return static_cast<std::size_t>(locations.cols()); }
};

void validate_point_cloud(const PointCloudSeries& pc);

double max_pairwise_distance(const PointCloudSeries& pc);

/// Empirical covariance over Euclidean distance bins; same binning rule as the 1-D estimator.
EmpiricalCovariance radial_empirical_covariance(const PointCloudSeries& pc, double bin_width, double max_radius,
                                                MeanHandling mean = MeanHandling::Subtract);
/// max_radius = half the largest pairwise distance, bin_width = max_radius / 30.
EmpiricalCovariance radial_empirical_covariance(const PointCloudSeries& pc);

/// Temporal fit of an IsotropicSE kernel (variance, lengthscale, noise) over radial bins.
/// cfg.divergence must be temporal; family is forced to IsotropicSE.
FitResult fit_isotropic(const EmpiricalCovariance& radial, const FitConfig& cfg);
FitResult fit_isotropic(const PointCloudSeries& pc, const FitConfig& cfg);

}  // namespace gvm
