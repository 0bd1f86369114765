#include "raresim/weighted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "raresim/errors.hpp"

namespace raresim {

Eigen::VectorXd normalize_log_weights(const Eigen::VectorXd& log_weights) {
  const double max_log = log_weights.maxCoeff();
  if (!std::isfinite(max_log))
    return Eigen::VectorXd::Zero(log_weights.size());
  Eigen::VectorXd w = (log_weights.array() - max_log).exp();
  // exp(-inf - max) is 0 as required; guard against NaN from inf - inf.
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (!std::isfinite(w[i])) w[i] = 0.0;
  const double total = w.sum();
  if (!(total > 0.0)) return Eigen::VectorXd::Zero(log_weights.size());
  return w / total;
}

WeightedSample WeightedSample::from_log_weights(Eigen::MatrixXd points,
                                                Eigen::VectorXd log_weights) {
  if (points.rows() != log_weights.size())
    throw DimensionMismatchError("WeightedSample: row count != weight count");
  WeightedSample ws;
  ws.normalized_weights = normalize_log_weights(log_weights);
  ws.points = std::move(points);
  ws.log_unnormalized_weights = std::move(log_weights);
  return ws;
}

double WeightedSample::effective_sample_size() const {
  const double s2 = normalized_weights.squaredNorm();
  return s2 > 0.0 ? 1.0 / s2 : 0.0;
}

double empirical_quantile(const Eigen::VectorXd& values, double rho) {
  if (values.size() < 1) throw ConfigError("empirical_quantile: empty sample");
  if (!(rho > 0.0 && rho < 1.0))
    throw ConfigError("empirical_quantile: rho must lie in (0, 1)");
  const auto n = static_cast<std::size_t>(values.size());
  const auto index = static_cast<std::size_t>(
      std::floor((1.0 - rho) * static_cast<double>(n)));
  if (index < 1)
    throw ConfigError("empirical_quantile: sample too small for rho");
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::nth_element(sorted.begin(), sorted.begin() + (index - 1), sorted.end());
  return sorted[index - 1];
}

namespace {
void require_mass(const WeightedSample& ws, const char* where) {
  if (!ws.has_mass()) throw DegenerateWeightsError(where);
}
}  // namespace

Eigen::VectorXd weighted_mean(const WeightedSample& ws) {
  require_mass(ws, "weighted_mean: all weights are zero");
  return ws.points.transpose() * ws.normalized_weights;
}

Eigen::MatrixXd weighted_full_covariance(const WeightedSample& ws,
                                         const Eigen::VectorXd& m) {
  require_mass(ws, "weighted_full_covariance: all weights are zero");
  const Eigen::MatrixXd centered = ws.points.rowwise() - m.transpose();
  return centered.transpose() *
         ws.normalized_weights.asDiagonal() * centered;
}

Eigen::VectorXd weighted_diagonal_variance(const WeightedSample& ws,
                                           const Eigen::VectorXd& m) {
  require_mass(ws, "weighted_diagonal_variance: all weights are zero");
  const Eigen::MatrixXd centered = ws.points.rowwise() - m.transpose();
  return centered.array().square().matrix().transpose() *
         ws.normalized_weights;
}

double projected_variance(const WeightedSample& ws, const Eigen::VectorXd& m) {
  require_mass(ws, "projected_variance: all weights are zero");
  const double norm = m.norm();
  if (norm == 0.0)
    throw ZeroMeanDirectionError(
        "projected_variance: projection direction undefined for m = 0");
  const Eigen::VectorXd proj = ws.points * (m / norm);
  return ws.normalized_weights.dot(
      (proj.array() - norm).square().matrix());
}

StructuredCovariance build_rank_one_covariance(const Eigen::VectorXd& m,
                                               double v, double eps) {
  const double norm = m.norm();
  if (norm == 0.0)
    throw ZeroMeanDirectionError(
        "build_rank_one_covariance: direction undefined for m = 0");
  return StructuredCovariance::rank_one(m / norm, v, eps);
}

double coefficient_of_variation(const Eigen::VectorXd& values) {
  const auto n = values.size();
  if (n < 1) throw ConfigError("coefficient_of_variation: empty sample");
  const double mean = values.mean();
  if (mean == 0.0)
    throw ZeroMeanCovError("coefficient_of_variation: zero sample mean");
  if (n == 1) return 0.0;
  const double ss = (values.array() - mean).square().sum();
  return std::sqrt(ss / static_cast<double>(n - 1)) / mean;
}

}  // namespace raresim
