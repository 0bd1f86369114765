#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "raresim/errors.hpp"
#include "raresim/limit_state.hpp"
#include "raresim/rng.hpp"
#include "raresim/special.hpp"

using namespace raresim;

TEST_CASE("linear sum") {
  const auto g9 = make_linear_sum(9);
  CHECK(g9.evaluate(Eigen::VectorXd::Zero(9)) ==
        doctest::Approx(-9.0).epsilon(1e-15));

  const auto g4 = make_linear_sum(4);
  CHECK(g4.evaluate(Eigen::VectorXd::Constant(4, 1.5)) ==
        doctest::Approx(0.0).epsilon(1e-14));
  CHECK_THROWS_AS(make_linear_sum(0), ConfigError);
}

TEST_CASE("ackley: first-coordinate invariance and direct formula") {
  const int n = 10;
  const double c = 17.0;
  const auto g = make_modified_ackley(n, c);
  RngStream rng(9);

  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd x = rng.normal_vector(n);
    const double base = g.evaluate(x);
    x[0] += 5.0 * rng.normal();
    CHECK(g.evaluate(x) == doctest::Approx(base).epsilon(1e-14));
  }

  // Point with a_j x_j = 3 for j >= 2 (a_j = 2(j-1)/n, 1-based j).
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (int j = 1; j < n; ++j) x[j] = 3.0 * n / (2.0 * j);
  const double expected =
      20.0 * std::exp(-0.2 * std::sqrt(9.0 / n)) +
      std::exp((std::cos(-6.0 * std::numbers::pi) + (n - 1)) / n) - c;
  CHECK(g.evaluate(x) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("portfolio: zero point, hand example, value lattice") {
  const int n = 4;
  const double b = 0.25;
  const auto g = make_portfolio(n, b);
  CHECK(g.dim() == n + 2);
  CHECK(g.evaluate(Eigen::VectorXd::Zero(n + 2)) ==
        doctest::Approx(-b * n).epsilon(1e-14));

  // U = 0, mu-tilde = 0 so mu is the Gamma(6,6) median; eta = (10,10,-10,-10)
  // puts exactly two obligors past the 0.5 sqrt(n) level.
  Eigen::VectorXd x(n + 2);
  x << 0.0, 0.0, 10.0, 10.0, -10.0, -10.0;
  const double mu = gamma_inverse_cdf(0.5, 6.0, 6.0);
  const double psi = 3.0 * std::sqrt(1.0 - 0.25 * 0.25) * 10.0 / std::sqrt(mu);
  CHECK(psi == doctest::Approx(29.047 / std::sqrt(mu)).epsilon(1e-4));
  CHECK(psi >= 1.0);
  CHECK(g.evaluate(x) == doctest::Approx(1.0).epsilon(1e-14));

  // phi only takes values on the lattice {-bn, 1-bn, ..., n-bn}.
  RngStream rng(13);
  const auto g30 = make_portfolio(30, 0.45);
  for (int rep = 0; rep < 500; ++rep) {
    const double phi = g30.evaluate(rng.normal_vector(32));
    const double losses = phi + 0.45 * 30.0;
    CHECK(losses == doctest::Approx(std::round(losses)).epsilon(1e-10));
    CHECK(losses >= -1e-10);
    CHECK(losses <= 30.0 + 1e-10);
  }
}

TEST_CASE("parabola: boundary cases and tail-coordinate invariance") {
  const auto g = make_parabola(5, 3.0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(5);
  x[0] = 3.0;
  CHECK(g.evaluate(x) == doctest::Approx(0.0).epsilon(1e-14));
  x[0] = 6.0;
  x[1] = 1.0;
  CHECK(g.evaluate(x) == doctest::Approx(0.0).epsilon(1e-14));

  RngStream rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd y = rng.normal_vector(5);
    const double base = g.evaluate(y);
    y.tail(3) = rng.normal_vector(3);
    CHECK(g.evaluate(y) == doctest::Approx(base).epsilon(1e-14));
  }
  CHECK_THROWS_AS(make_parabola(1, 3.0), ConfigError);
}

TEST_CASE("evaluation counter") {
  const auto g = make_linear_sum(3);
  CHECK(g.evaluations() == 0);
  g.evaluate(Eigen::VectorXd::Zero(3));
  CHECK(g.evaluations() == 1);
  RngStream rng(1);
  g.evaluate_batch(rng.normal_matrix(7, 3));
  CHECK(g.evaluations() == 8);
}

TEST_CASE("ackley calibration: monotone targets and median sanity") {
  const int n = 6;
  RngStream rng(23);
  const long samples = 400'000;
  const double c_hi = calibrate_ackley_threshold(n, 1e-3, rng, samples);
  RngStream rng2(23);
  const double c_lo = calibrate_ackley_threshold(n, 1e-2, rng2, samples);
  CHECK(c_lo < c_hi);

  // Target 0.5 lands at the median of the response, so half the fresh
  // sample should fail.
  RngStream rng3(23);
  const double c_med =
      calibrate_ackley_threshold(n, 0.499999, rng3, samples);
  const auto g = make_modified_ackley(n, c_med);
  RngStream fresh(101);
  long fails = 0;
  const long check = 200'000;
  for (long i = 0; i < check; ++i)
    if (g.evaluate(fresh.normal_vector(n)) >= 0.0) ++fails;
  CHECK(std::abs(fails / static_cast<double>(check) - 0.5) < 0.01);

  CHECK_THROWS_AS(calibrate_ackley_threshold(n, 0.9, rng, samples),
                  ConfigError);
}

TEST_CASE("ackley calibration hits the target probability") {
  const int n = 10;
  const double target = 1.64e-3;
  RngStream rng(31);
  const double c = calibrate_ackley_threshold(n, target, rng, 2'000'000);
  const auto g = make_modified_ackley(n, c);
  RngStream fresh(202);
  long fails = 0;
  const long check = 2'000'000;
  for (long i = 0; i < check; ++i)
    if (g.evaluate(fresh.normal_vector(n)) >= 0.0) ++fails;
  const double p = fails / static_cast<double>(check);
  CHECK(p > 0.8 * target);
  CHECK(p < 1.2 * target);
}

TEST_CASE("linear optimal parameters: analytic values") {
  const double lambda = mills_ratio(3.0);
  CHECK(lambda == doctest::Approx(3.2831).epsilon(1e-4));
  const double v = 1.0 + 3.0 * lambda - lambda * lambda;
  CHECK(v == doctest::Approx(0.0705).epsilon(2e-3));

  const auto params = linear_optimal_params(4);
  CHECK(params.mean.norm() == doctest::Approx(lambda).epsilon(1e-12));
  CHECK(params.mean[0] == doctest::Approx(lambda / 2.0).epsilon(1e-12));
  const Eigen::MatrixXd dense = params.covariance.dense();
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(4, 0.5);
  CHECK(u.dot(dense * u) == doctest::Approx(v).epsilon(1e-4));
}

TEST_CASE("linear optimal parameters vs accept-reject conditional oracle") {
  // Conditional sampling X | sum(X) >= 3 sqrt(5) by rejection from the
  // standard normal; the projected conditional moments must match the
  // truncated-normal values within 3 statistical sigmas.
  const int n = 5;
  const auto g = make_linear_sum(n);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  RngStream rng(57);
  std::vector<double> projections;
  const long draws = 3'000'000;
  for (long i = 0; i < draws; ++i) {
    const Eigen::VectorXd x = rng.normal_vector(n);
    if (g.evaluate(x) >= 0.0) projections.push_back(x.sum() * inv_sqrt_n);
  }
  REQUIRE(projections.size() > 2000);
  const auto k = static_cast<double>(projections.size());
  double mean = 0.0;
  for (double y : projections) mean += y;
  mean /= k;
  double var = 0.0, m4 = 0.0;
  for (double y : projections) {
    const double d2 = (y - mean) * (y - mean);
    var += d2;
    m4 += d2 * d2;
  }
  var /= (k - 1.0);
  m4 /= k;

  const double lambda = mills_ratio(3.0);
  const double v = 1.0 + 3.0 * lambda - lambda * lambda;
  const double mean_se = std::sqrt(var / k);
  CHECK(std::abs(mean - lambda) < 3.0 * mean_se);
  // Asymptotic SE of the sample variance via the fourth central moment.
  const double var_se = std::sqrt((m4 - var * var) / k);
  CHECK(std::abs(var - v) < 3.0 * var_se);
}
