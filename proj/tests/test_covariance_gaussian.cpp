#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "raresim/errors.hpp"
#include "raresim/gaussian.hpp"
#include "raresim/rng.hpp"

using namespace raresim;

namespace {

Eigen::MatrixXd random_spd(Eigen::Index n, RngStream& rng) {
  const Eigen::MatrixXd a = rng.normal_matrix(n, n);
  return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST_CASE("rank-one form has the stated eigenvalues and is SPD") {
  const int n = 12;
  RngStream rng(11);
  Eigen::VectorXd dir = rng.normal_vector(n);
  dir.normalize();
  const double v = 0.07, eps = 1e-6;
  const auto cov = StructuredCovariance::rank_one(dir, v, eps);

  const Eigen::MatrixXd dense = cov.dense();
  CHECK(dense.isApprox(dense.transpose(), 1e-14));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  const Eigen::VectorXd ev = es.eigenvalues();
  CHECK(ev.minCoeff() == doctest::Approx(v + eps).epsilon(1e-12));
  for (int i = 1; i < n; ++i)
    CHECK(ev[i] == doctest::Approx(1.0 + eps).epsilon(1e-12));
  CHECK(cov.log_det() ==
        doctest::Approx((n - 1) * std::log1p(eps) + std::log(v + eps))
            .epsilon(1e-13));
}

TEST_CASE("structured forms match dense likelihood-ratio oracle") {
  const int n = 8;
  RngStream rng(21);

  auto check_against_dense = [&](const GaussianParams& structured) {
    const GaussianParams dense_params(
        structured.mean, StructuredCovariance::full(
                             structured.covariance.dense()));
    for (int rep = 0; rep < 100; ++rep) {
      const Eigen::VectorXd x = 3.0 * rng.normal_vector(n);
      const double a = log_likelihood_ratio(structured, x);
      const double b = log_likelihood_ratio(dense_params, x);
      CHECK(std::abs(a - b) < 1e-9);
    }
  };

  Eigen::VectorXd mean = rng.normal_vector(n);
  Eigen::VectorXd dir = rng.normal_vector(n);
  dir.normalize();

  check_against_dense(
      {mean, StructuredCovariance::rank_one(dir, 0.25, 1e-6)});
  check_against_dense(
      {mean, StructuredCovariance::diagonal(
                 (rng.normal_vector(n).array().square() + 0.1).matrix())});
  check_against_dense({mean, StructuredCovariance::identity(n)});
  check_against_dense(
      {mean, StructuredCovariance::north_west_block(random_spd(5, rng), n)});
}

TEST_CASE("likelihood ratio identities") {
  const int n = 6;
  RngStream rng(5);
  const auto standard = GaussianParams::standard(n);
  for (int i = 0; i < 10; ++i)
    CHECK(log_likelihood_ratio(standard, rng.normal_vector(n)) ==
          doctest::Approx(0.0).epsilon(1e-14));

  // Mean shift only: log L = -m.x + |m|^2/2.
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
  m[0] = 1.0;
  const GaussianParams shifted(m, StructuredCovariance::identity(n));
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(n);
  e1[0] = 1.0;
  CHECK(log_likelihood_ratio(shifted, e1) ==
        doctest::Approx(-0.5).epsilon(1e-14));
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = rng.normal_vector(n);
    CHECK(log_likelihood_ratio(shifted, x) ==
          doctest::Approx(-m.dot(x) + 0.5 * m.squaredNorm()).epsilon(1e-12));
  }
}

TEST_CASE("sampling: determinism and empirical moments") {
  const int n = 5;
  const long count = 100'000;
  const auto standard = GaussianParams::standard(n);

  RngStream a(2024), b(2024);
  const Eigen::MatrixXd xa = sample(standard, 100, a);
  const Eigen::MatrixXd xb = sample(standard, 100, b);
  CHECK(xa == xb);

  RngStream rng(31);
  const Eigen::MatrixXd x = sample(standard, count, rng);
  const double bound = 4.0 / std::sqrt(static_cast<double>(count));
  for (int j = 0; j < n; ++j)
    CHECK(std::abs(x.col(j).mean()) < bound);

  // Rank-one along e1 with v = 0.25.
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(n);
  e1[0] = 1.0;
  const GaussianParams rank_one(
      Eigen::VectorXd::Zero(n),
      StructuredCovariance::rank_one(e1, 0.25, 1e-6));
  RngStream rng2(32);
  const Eigen::MatrixXd y = sample(rank_one, count, rng2);
  const Eigen::VectorXd y1 = y.col(0);
  const double var1 =
      (y1.array() - y1.mean()).square().sum() / (count - 1);
  CHECK(var1 > 0.24);
  CHECK(var1 < 0.26);
  // Orthogonal directions keep unit variance.
  const Eigen::VectorXd y2 = y.col(1);
  const double var2 =
      (y2.array() - y2.mean()).square().sum() / (count - 1);
  CHECK(var2 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("sampling covariance matches dense reconstruction") {
  const int n = 4;
  RngStream rng(77);
  const Eigen::MatrixXd spd = random_spd(n, rng);
  const GaussianParams params(rng.normal_vector(n),
                              StructuredCovariance::full(spd));
  const long count = 200'000;
  const Eigen::MatrixXd x = sample(params, count, rng);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(count - 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      CHECK(cov(i, j) == doctest::Approx(spd(i, j)).epsilon(0.05));
}

TEST_CASE("validation errors") {
  CHECK_THROWS_AS(StructuredCovariance::diagonal(Eigen::VectorXd::Zero(3)),
                  ConfigError);
  Eigen::MatrixXd not_spd = -Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(StructuredCovariance::full(not_spd), ConfigError);
  Eigen::VectorXd not_unit = Eigen::VectorXd::Constant(3, 1.0);
  CHECK_THROWS_AS(StructuredCovariance::rank_one(not_unit, 0.5, 1e-6),
                  ConfigError);
  CHECK_THROWS_AS(
      GaussianParams(Eigen::VectorXd::Zero(2),
                     StructuredCovariance::identity(3)),
      DimensionMismatchError);
}
