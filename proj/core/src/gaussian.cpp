#include "raresim/gaussian.hpp"

#include <utility>

#include "raresim/errors.hpp"

namespace raresim {

GaussianParams::GaussianParams(Eigen::VectorXd m, StructuredCovariance cov)
    : mean(std::move(m)), covariance(std::move(cov)) {
  if (mean.size() != covariance.dim())
    throw DimensionMismatchError(
        "GaussianParams: mean length != covariance dimension");
}

Eigen::MatrixXd sample(const GaussianParams& params, Eigen::Index count,
                       RngStream& rng) {
  if (count < 1) throw ConfigError("sample: count must be >= 1");
  Eigen::MatrixXd iid = rng.normal_matrix(count, params.dim());
  Eigen::MatrixXd x = params.covariance.apply_sqrt(iid);
  x.rowwise() += params.mean.transpose();
  return x;
}

Eigen::VectorXd log_likelihood_ratios(const GaussianParams& params,
                                      const Eigen::MatrixXd& points) {
  if (points.cols() != params.dim())
    throw DimensionMismatchError("log_likelihood_ratios: dimension mismatch");
  // log f - log g = -||x||^2/2 + (x-m)^T Sigma^{-1} (x-m)/2 + log det Sigma/2
  const Eigen::MatrixXd centered = points.rowwise() - params.mean.transpose();
  const Eigen::VectorXd quad = params.covariance.quad_form(centered);
  return 0.5 * (params.covariance.log_det() + quad.array() -
                points.rowwise().squaredNorm().array())
      .matrix();
}

double log_likelihood_ratio(const GaussianParams& params,
                            const Eigen::VectorXd& x) {
  return log_likelihood_ratios(params, x.transpose())[0];
}

}  // namespace raresim
