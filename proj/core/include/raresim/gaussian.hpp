#pragma once

#include <Eigen/Core>

#include "raresim/covariance.hpp"
#include "raresim/rng.hpp"

namespace raresim {

/// Auxiliary Gaussian density parameters (m, Sigma).
struct GaussianParams {
  Eigen::VectorXd mean;
  StructuredCovariance covariance;

  GaussianParams(Eigen::VectorXd m, StructuredCovariance cov);

  static GaussianParams standard(Eigen::Index n) {
    return GaussianParams(Eigen::VectorXd::Zero(n),
                          StructuredCovariance::identity(n));
  }

  Eigen::Index dim() const { return mean.size(); }
};

/// Draws `count` iid rows from N(m, Sigma).
Eigen::MatrixXd sample(const GaussianParams& params, Eigen::Index count,
                       RngStream& rng);

/// log L(x) = log f(x) - log g_{m,Sigma}(x) with f the standard normal.
double log_likelihood_ratio(const GaussianParams& params,
                            const Eigen::VectorXd& x);

/// Batched version over the rows of `points`.
Eigen::VectorXd log_likelihood_ratios(const GaussianParams& params,
                                      const Eigen::MatrixXd& points);

}  // namespace raresim
