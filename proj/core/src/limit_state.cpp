#include "raresim/limit_state.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "raresim/errors.hpp"
#include "raresim/special.hpp"
#include "raresim/weighted.hpp"

namespace raresim {

LimitState make_linear_sum(Eigen::Index n) {
  if (n < 1) throw ConfigError("linear benchmark needs n >= 1");
  const double offset = 3.0 * std::sqrt(static_cast<double>(n));
  return LimitState("linear", n, [offset](const Eigen::VectorXd& x) {
    return x.sum() - offset;
  });
}

LimitState make_modified_ackley(Eigen::Index n, double threshold) {
  if (n < 1) throw ConfigError("ackley benchmark needs n >= 1");
  Eigen::VectorXd a(n);
  for (Eigen::Index j = 0; j < n; ++j)
    a[j] = 2.0 * static_cast<double>(j) / static_cast<double>(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  return LimitState(
      "ackley", n, [a, inv_n, threshold](const Eigen::VectorXd& x) {
        const Eigen::ArrayXd t = a.array() * x.array() - 3.0;
        const double quad = (t.square().sum()) * inv_n;
        const double cosine =
            (2.0 * std::numbers::pi * t).cos().sum() * inv_n;
        return 20.0 * std::exp(-0.2 * std::sqrt(quad)) + std::exp(cosine) -
               threshold;
      });
}

LimitState make_portfolio(Eigen::Index n, double loss_fraction) {
  if (n < 1) throw ConfigError("portfolio benchmark needs n >= 1");
  constexpr double q = 0.25;
  constexpr double noise_scale = 3.0;
  constexpr double gamma_shape = 6.0;
  constexpr double gamma_rate = 6.0;
  const double level = 0.5 * std::sqrt(static_cast<double>(n));
  const double loss_offset = loss_fraction * static_cast<double>(n);
  return LimitState(
      "portfolio", n + 2, [=](const Eigen::VectorXd& x) {
        const double u = x[0];
        const double mu_tilde = x[1];
        const double mu = gamma_inverse_cdf(standard_normal_cdf(mu_tilde),
                                            gamma_shape, gamma_rate);
        const double inv_sqrt_mu = 1.0 / std::sqrt(mu);
        const double systemic = q * u;
        const double idio = noise_scale * std::sqrt(1.0 - q * q);
        long losses = 0;
        for (Eigen::Index j = 2; j < x.size(); ++j) {
          const double psi = (systemic + idio * x[j]) * inv_sqrt_mu;
          if (psi >= level) ++losses;
        }
        return static_cast<double>(losses) - loss_offset;
      });
}

LimitState make_parabola(Eigen::Index n, double kappa) {
  if (n < 2) throw ConfigError("parabola benchmark needs n >= 2");
  return LimitState("parabola", n, [kappa](const Eigen::VectorXd& x) {
    return x[0] - kappa * x[1] * x[1] - 3.0;
  });
}

double calibrate_ackley_threshold(Eigen::Index n, double target_p,
                                  RngStream& rng, long samples) {
  if (!(target_p > 1e-6 && target_p < 0.5))
    throw ConfigError("calibrate_ackley_threshold: target_p out of range");
  if (samples < 1) throw ConfigError("calibration needs samples >= 1");
  // phi = A(x) - c is monotone decreasing in c, so the calibrated c is the
  // (1 - target_p) quantile of the response A over a crude MC sample.
  LimitState response = make_modified_ackley(n, 0.0);
  std::vector<double> values(static_cast<std::size_t>(samples));
  Eigen::VectorXd x(n);
  for (long i = 0; i < samples; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) x[j] = rng.normal();
    values[static_cast<std::size_t>(i)] = response.evaluate(x);
  }
  const auto rank = static_cast<std::size_t>(
      std::floor((1.0 - target_p) * static_cast<double>(samples)));
  const auto k = std::min(rank, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<long>(k),
                   values.end());
  return values[k];
}

double mills_ratio(double a) {
  return standard_normal_pdf(a) / standard_normal_cdf(-a);
}

GaussianParams linear_optimal_params(Eigen::Index n, double eps) {
  const double lambda = mills_ratio(3.0);
  const double v = 1.0 + 3.0 * lambda - lambda * lambda;
  const Eigen::VectorXd u =
      Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  return GaussianParams(lambda * u,
                        StructuredCovariance::rank_one(u, v, eps));
}

}  // namespace raresim
