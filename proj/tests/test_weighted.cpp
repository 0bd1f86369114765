#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "raresim/errors.hpp"
#include "raresim/rng.hpp"
#include "raresim/weighted.hpp"

using namespace raresim;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

WeightedSample uniform_sample(const Eigen::MatrixXd& points) {
  return WeightedSample::from_log_weights(
      points, Eigen::VectorXd::Zero(points.rows()));
}

}  // namespace

TEST_CASE("normalization: shift invariance and max-subtraction stability") {
  Eigen::VectorXd lw(4);
  lw << -1.0, 0.0, 2.0, -3.0;
  const Eigen::VectorXd w = normalize_log_weights(lw);
  CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-14));
  const Eigen::VectorXd w_shift =
      normalize_log_weights((lw.array() + 1234.5).matrix());
  CHECK((w - w_shift).cwiseAbs().maxCoeff() < 1e-13);

  // Huge magnitudes that would overflow a naive exp.
  Eigen::VectorXd big(3);
  big << 5000.0, 5001.0, 4990.0;
  const Eigen::VectorXd wb = normalize_log_weights(big);
  CHECK(wb.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(wb[1] > wb[0]);
  CHECK(wb[0] > wb[2]);

  // All -inf collapses to the zero vector rather than NaN.
  const Eigen::VectorXd none =
      normalize_log_weights(Eigen::VectorXd::Constant(3, -kInf));
  CHECK(none.isZero(0.0));
}

TEST_CASE("quantile: hand values, permutation invariance, monotone in rho") {
  Eigen::VectorXd v10(10);
  for (int i = 0; i < 10; ++i) v10[i] = i + 1;
  CHECK(empirical_quantile(v10, 0.1) == 9.0);

  Eigen::VectorXd v100(100);
  std::iota(v100.data(), v100.data() + 100, 1.0);
  CHECK(empirical_quantile(v100, 0.25) == 75.0);

  std::mt19937 gen(3);
  Eigen::VectorXd shuffled = v100;
  std::shuffle(shuffled.data(), shuffled.data() + 100, gen);
  CHECK(empirical_quantile(shuffled, 0.25) == 75.0);

  double prev = empirical_quantile(v100, 0.05);
  for (double rho = 0.10; rho < 0.95; rho += 0.05) {
    const double q = empirical_quantile(v100, rho);
    CHECK(q <= prev);
    prev = q;
  }

  CHECK_THROWS_AS(empirical_quantile(v10, 0.999), ConfigError);
}

TEST_CASE("coefficient of variation") {
  Eigen::VectorXd v(2);
  v << 0.0, 2.0;
  CHECK(coefficient_of_variation(v) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  // Scale invariance.
  CHECK(coefficient_of_variation(1e-8 * v) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(coefficient_of_variation(Eigen::VectorXd::Constant(5, 3.0)) == 0.0);
  CHECK_THROWS_AS(coefficient_of_variation(Eigen::VectorXd::Zero(4)),
                  ZeroMeanCovError);
}

TEST_CASE("weighted mean and covariance hand example") {
  Eigen::MatrixXd pts(2, 2);
  pts << 0.0, 0.0,
         2.0, 0.0;
  const auto ws = uniform_sample(pts);
  const Eigen::VectorXd m = weighted_mean(ws);
  CHECK(m[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m[1] == 0.0);

  const Eigen::MatrixXd c = weighted_full_covariance(ws, m);
  CHECK(c(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c(0, 1) == 0.0);
  CHECK(c(1, 1) == 0.0);

  // Unequal weights: w = (1/4, 3/4) -> mean 3/2, var (3/4)(1/4)*4 = 3/4.
  Eigen::VectorXd lw(2);
  lw << std::log(1.0), std::log(3.0);
  const auto ws2 = WeightedSample::from_log_weights(pts, lw);
  const Eigen::VectorXd m2 = weighted_mean(ws2);
  CHECK(m2[0] == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(weighted_full_covariance(ws2, m2)(0, 0) ==
        doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("diagonal variance matches the full covariance diagonal") {
  RngStream rng(42);
  const Eigen::MatrixXd pts = rng.normal_matrix(200, 7);
  const auto ws =
      WeightedSample::from_log_weights(pts, rng.normal_vector(200));
  const Eigen::VectorXd m = weighted_mean(ws);
  const Eigen::VectorXd d = weighted_diagonal_variance(ws, m);
  const Eigen::MatrixXd c = weighted_full_covariance(ws, m);
  CHECK((d - c.diagonal()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projection identity: R' C R equals projected variance") {
  RngStream rng(7);
  const Eigen::MatrixXd pts = rng.normal_matrix(500, 9);
  const auto ws =
      WeightedSample::from_log_weights(pts, 0.3 * rng.normal_vector(500));
  const Eigen::VectorXd m = weighted_mean(ws);
  REQUIRE(m.norm() > 0.0);
  const Eigen::VectorXd r = m.normalized();

  const double v = projected_variance(ws, m);
  // Oracle: project every point first, then take the weighted variance
  // about ||m|| directly.
  double direct = 0.0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const double y = r.dot(pts.row(i)) - m.norm();
    direct += ws.normalized_weights[i] * y * y;
  }
  CHECK(std::abs(v - direct) < 1e-12);

  // And it equals the quadratic form through the full covariance since
  // R' (X - m) = R' X - ||m||.
  const Eigen::MatrixXd c = weighted_full_covariance(ws, m);
  CHECK(std::abs(v - r.dot(c * r)) < 1e-12);
}

TEST_CASE("rank-one build round trip") {
  Eigen::VectorXd m(3);
  m << 3.0, 0.0, 0.0;
  const auto cov = build_rank_one_covariance(m, 0.25, 1e-6);
  const Eigen::MatrixXd dense = cov.dense();
  CHECK(dense(0, 0) == doctest::Approx(0.25 + 1e-6).epsilon(1e-14));
  CHECK(dense(1, 1) == doctest::Approx(1.0 + 1e-6).epsilon(1e-14));
  CHECK(dense(0, 1) == 0.0);
  CHECK_THROWS_AS(build_rank_one_covariance(Eigen::VectorXd::Zero(3), 0.25,
                                            1e-6),
                  ZeroMeanDirectionError);
}

TEST_CASE("effective sample size") {
  Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(4, 1);
  const auto even = uniform_sample(pts);
  CHECK(even.effective_sample_size() == doctest::Approx(4.0).epsilon(1e-14));

  Eigen::VectorXd lw = Eigen::VectorXd::Constant(4, -kInf);
  lw[2] = 0.0;
  const auto one = WeightedSample::from_log_weights(pts, lw);
  CHECK(one.effective_sample_size() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("degenerate weights throw from the moment estimators") {
  Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(3, 2);
  const auto dead = WeightedSample::from_log_weights(
      pts, Eigen::VectorXd::Constant(3, -kInf));
  CHECK_FALSE(dead.has_mass());
  CHECK_THROWS_AS(weighted_mean(dead), DegenerateWeightsError);
  CHECK_THROWS_AS(weighted_full_covariance(dead, Eigen::VectorXd::Zero(2)),
                  DegenerateWeightsError);
  CHECK_THROWS_AS(weighted_diagonal_variance(dead, Eigen::VectorXd::Zero(2)),
                  DegenerateWeightsError);
}
