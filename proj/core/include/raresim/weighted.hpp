#pragma once

#include <Eigen/Core>

#include "raresim/covariance.hpp"

namespace raresim {

/// A batch of points with importance weights kept in log space.
///
/// Normalization subtracts the max log-weight before exponentiating, so the
/// normalized weights are finite for any weight scale. If every unnormalized
/// weight is zero the normalized weights are all zero and the moment
/// estimators below throw DegenerateWeightsError.
struct WeightedSample {
  Eigen::MatrixXd points;                    // N x n
  Eigen::VectorXd log_unnormalized_weights;  // length N, -inf allowed
  Eigen::VectorXd normalized_weights;        // length N, sums to 1 or all 0

  static WeightedSample from_log_weights(Eigen::MatrixXd points,
                                         Eigen::VectorXd log_weights);

  bool has_mass() const { return normalized_weights.sum() > 0.0; }

  /// 1 / sum w_i^2, the usual effective sample size.
  double effective_sample_size() const;
};

/// Exp-normalization of log-weights via max subtraction. All -inf maps to
/// the zero vector.
Eigen::VectorXd normalize_log_weights(const Eigen::VectorXd& log_weights);

/// Order statistic at 1-based index floor((1-rho) N) of the ascending sort.
/// Throws ConfigError when the index would be 0.
double empirical_quantile(const Eigen::VectorXd& values, double rho);

/// Sum w_i X_i. Throws DegenerateWeightsError when no weight is nonzero.
Eigen::VectorXd weighted_mean(const WeightedSample& ws);

/// Sum w_i (X_i - m)(X_i - m)^T.
Eigen::MatrixXd weighted_full_covariance(const WeightedSample& ws,
                                         const Eigen::VectorXd& m);

/// Diagonal of the weighted covariance.
Eigen::VectorXd weighted_diagonal_variance(const WeightedSample& ws,
                                           const Eigen::VectorXd& m);

/// Weighted variance of the projections R^T X_i about ||m||, with
/// R = m / ||m||. Throws ZeroMeanDirectionError when ||m|| = 0.
double projected_variance(const WeightedSample& ws, const Eigen::VectorXd& m);

/// (v - 1) R R^T + (1 + eps) I with R = m / ||m||.
StructuredCovariance build_rank_one_covariance(const Eigen::VectorXd& m,
                                               double v, double eps);

/// Sample standard deviation (N-1 denominator) divided by the sample mean.
/// Throws ZeroMeanCovError on a zero mean.
double coefficient_of_variation(const Eigen::VectorXd& values);

}  // namespace raresim
