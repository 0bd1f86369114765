#include "raresim/estimators.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "raresim/errors.hpp"
#include "raresim/special.hpp"
#include "raresim/weighted.hpp"

namespace raresim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GaussianParams initial_params(const EstimatorConfig& cfg, Eigen::Index n) {
  if (cfg.initial) {
    if (cfg.initial->dim() != n)
      throw DimensionMismatchError("initial params dimension != limit state");
    return *cfg.initial;
  }
  switch (cfg.family.kind) {
    case CovarianceFamily::Kind::FixedCovariance:
      return GaussianParams(Eigen::VectorXd::Zero(n),
                            *cfg.family.fixed_covariance);
    case CovarianceFamily::Kind::FixedMean:
      return GaussianParams(*cfg.family.fixed_mean,
                            StructuredCovariance::identity(n));
    default:
      return GaussianParams::standard(n);
  }
}

void validate(const EstimatorConfig& cfg, Eigen::Index n) {
  if (cfg.sample_size < 1) throw ConfigError("sample_size must be >= 1");
  if (cfg.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (!(cfg.smoothing_alpha > 0.0 && cfg.smoothing_alpha <= 1.0))
    throw ConfigError("smoothing_alpha must lie in (0, 1]");
  if (cfg.family.kind == CovarianceFamily::Kind::FixedCovariance &&
      cfg.family.fixed_covariance->dim() != n)
    throw DimensionMismatchError("fixed covariance dimension != limit state");
  if (cfg.family.kind == CovarianceFamily::Kind::FixedMean &&
      cfg.family.fixed_mean->size() != n)
    throw DimensionMismatchError("fixed mean dimension != limit state");
}

/// A dense weighted covariance fit whose spectrum has collapsed to machine
/// precision no longer describes the sample: the eps floor would only paper
/// over a rank-deficient matrix, so reject it and let the caller record NC.
void require_numerically_spd(const Eigen::MatrixXd& c) {
  const Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues();
  if (!(ev.minCoeff() > 1e-12 * ev.maxCoeff()))
    throw ConfigError("estimated covariance is numerically singular");
}

/// Covariance update dispatched on the family; every estimated form gets
/// the +eps I regularization of Remark-2 style rounding protection.
StructuredCovariance update_covariance(const CovarianceFamily& family,
                                       const WeightedSample& ws,
                                       const Eigen::VectorXd& center,
                                       double eps, Eigen::Index n) {
  switch (family.kind) {
    case CovarianceFamily::Kind::Full: {
      Eigen::MatrixXd c = weighted_full_covariance(ws, center);
      c = 0.5 * (c + c.transpose()).eval();
      require_numerically_spd(c);
      c.diagonal().array() += eps;
      return StructuredCovariance::full(std::move(c));
    }
    case CovarianceFamily::Kind::Diagonal: {
      Eigen::VectorXd d = weighted_diagonal_variance(ws, center);
      d.array() += eps;
      return StructuredCovariance::diagonal(std::move(d));
    }
    case CovarianceFamily::Kind::RankOneAlongMean: {
      const double v = projected_variance(ws, center);
      return build_rank_one_covariance(center, v, eps);
    }
    case CovarianceFamily::Kind::FixedCovariance:
      return *family.fixed_covariance;
    case CovarianceFamily::Kind::FixedMean: {
      if (family.inner == CovarianceFamily::Inner::Full) {
        Eigen::MatrixXd c = weighted_full_covariance(ws, center);
        c = 0.5 * (c + c.transpose()).eval();
        require_numerically_spd(c);
        c.diagonal().array() += eps;
        return StructuredCovariance::full(std::move(c));
      }
      const auto k = std::max<Eigen::Index>(
          1, static_cast<Eigen::Index>(std::floor(
                 family.block_fraction * static_cast<double>(n))));
      WeightedSample head;
      head.points = ws.points.leftCols(k);
      head.log_unnormalized_weights = ws.log_unnormalized_weights;
      head.normalized_weights = ws.normalized_weights;
      Eigen::MatrixXd block = weighted_full_covariance(head, center.head(k));
      block = 0.5 * (block + block.transpose()).eval();
      require_numerically_spd(block);
      block.diagonal().array() += eps;
      return StructuredCovariance::north_west_block(std::move(block), n);
    }
  }
  throw ConfigError("unknown covariance family");
}

struct Batch {
  Eigen::MatrixXd points;
  Eigen::VectorXd phi;
  Eigen::VectorXd log_l;
};

Batch draw_batch(const LimitState& ls, const GaussianParams& params,
                 Eigen::Index count, RngStream& rng) {
  Batch b;
  b.points = sample(params, count, rng);
  b.phi = ls.evaluate_batch(b.points);
  b.log_l = log_likelihood_ratios(params, b.points);
  return b;
}

// The moment updates divide by the weight sum; when even the largest
// unnormalized weight underflows double precision that sum is 0 and the
// update is impossible (weight degeneracy).
bool weights_underflow(const Eigen::VectorXd& logw) {
  return !(logw.maxCoeff() >
           std::log(std::numeric_limits<double>::min()));
}

double final_estimate(const Batch& batch) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < batch.phi.size(); ++i)
    if (batch.phi[i] >= 0.0) sum += std::exp(batch.log_l[i]);
  return sum / static_cast<double>(batch.phi.size());
}

}  // namespace

CovarianceFamily CovarianceFamily::with_fixed_covariance(
    StructuredCovariance cov) {
  CovarianceFamily f;
  f.kind = Kind::FixedCovariance;
  f.fixed_covariance = std::move(cov);
  return f;
}

CovarianceFamily CovarianceFamily::with_fixed_mean(Eigen::VectorXd mean,
                                                   Inner inner,
                                                   double block_fraction) {
  if (!(block_fraction > 0.0 && block_fraction <= 1.0))
    throw ConfigError("block_fraction must lie in (0, 1]");
  CovarianceFamily f;
  f.kind = Kind::FixedMean;
  f.fixed_mean = std::move(mean);
  f.inner = inner;
  f.block_fraction = block_fraction;
  return f;
}

TrialResult crude_monte_carlo(const LimitState& ls, long count,
                              RngStream& rng) {
  if (count < 1) throw ConfigError("crude_monte_carlo: count must be >= 1");
  const long start = ls.evaluations();
  const GaussianParams params = GaussianParams::standard(ls.dim());
  long failures = 0;
  long remaining = count;
  while (remaining > 0) {
    const long chunk = std::min<long>(remaining, 100'000);
    const Eigen::MatrixXd x = sample(params, chunk, rng);
    const Eigen::VectorXd phi = ls.evaluate_batch(x);
    failures += (phi.array() >= 0.0).count();
    remaining -= chunk;
  }
  TrialResult res;
  res.p_hat = static_cast<double>(failures) / static_cast<double>(count);
  res.budget = ls.evaluations() - start;
  return res;
}

TrialResult importance_sampling(const LimitState& ls, const GaussianParams& g,
                                long count, RngStream& rng) {
  if (count < 1) throw ConfigError("importance_sampling: count must be >= 1");
  if (g.dim() != ls.dim())
    throw DimensionMismatchError("importance_sampling: dimension mismatch");
  const long start = ls.evaluations();
  double sum = 0.0;
  long remaining = count;
  while (remaining > 0) {
    const long chunk = std::min<long>(remaining, 100'000);
    const Batch b = draw_batch(ls, g, chunk, rng);
    for (Eigen::Index i = 0; i < b.phi.size(); ++i)
      if (b.phi[i] >= 0.0) sum += std::exp(b.log_l[i]);
    remaining -= chunk;
  }
  TrialResult res;
  res.p_hat = sum / static_cast<double>(count);
  res.budget = ls.evaluations() - start;
  return res;
}

GaussianParams smooth_update(const GaussianParams& next,
                             const GaussianParams& previous, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw ConfigError("smooth_update: alpha must lie in (0, 1]");
  if (next.dim() != previous.dim())
    throw DimensionMismatchError("smooth_update: dimension mismatch");
  if (alpha == 1.0) return next;

  using Kind = StructuredCovariance::Kind;
  const Eigen::VectorXd mean =
      alpha * next.mean + (1.0 - alpha) * previous.mean;
  const Kind nk = next.covariance.kind();
  const Kind pk = previous.covariance.kind();

  if (nk == Kind::RankOne && (pk == Kind::RankOne || pk == Kind::Identity)) {
    // Directions change between iterations, so blend (m, v) component-wise
    // and rebuild along the blended mean.
    const double pv =
        pk == Kind::RankOne ? previous.covariance.rank_one_variance() : 1.0;
    const double v =
        alpha * next.covariance.rank_one_variance() + (1.0 - alpha) * pv;
    return GaussianParams(
        mean, build_rank_one_covariance(mean, v, next.covariance.epsilon()));
  }
  if (nk == Kind::Diagonal && (pk == Kind::Diagonal || pk == Kind::Identity)) {
    const Eigen::VectorXd pd = pk == Kind::Diagonal
                                   ? previous.covariance.diagonal_entries()
                                   : Eigen::VectorXd::Ones(previous.dim());
    return GaussianParams(
        mean, StructuredCovariance::diagonal(
                  alpha * next.covariance.diagonal_entries() +
                  (1.0 - alpha) * pd));
  }
  if (nk == Kind::Identity && pk == Kind::Identity)
    return GaussianParams(mean, StructuredCovariance::identity(next.dim()));
  if (nk == Kind::RankOne || pk == Kind::RankOne || nk == Kind::Diagonal ||
      pk == Kind::Diagonal)
    throw ConfigError("smooth_update: parameter shape mismatch");
  // Dense-representable forms blend their reconstructions.
  return GaussianParams(
      mean, StructuredCovariance::full(alpha * next.covariance.dense() +
                                       (1.0 - alpha) *
                                           previous.covariance.dense()));
}

TrialResult run_ce(const LimitState& ls, const EstimatorConfig& cfg,
                   RngStream& rng) {
  const Eigen::Index n = ls.dim();
  validate(cfg, n);
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0))
    throw ConfigError("rho must lie in (0, 1)");
  if (std::floor((1.0 - cfg.rho) * cfg.sample_size) < 1.0)
    throw ConfigError("sample_size too small for rho");

  const long start = ls.evaluations();
  GaussianParams params = initial_params(cfg, n);
  TrialResult res;

  Batch batch = draw_batch(ls, params, cfg.sample_size, rng);
  double gamma = empirical_quantile(batch.phi, cfg.rho);
  res.trace.push_back(
      {0, gamma, params, 0.0, ls.evaluations() - start});

  int t = 0;
  while (gamma < 0.0 && t < cfg.max_iterations) {
    Eigen::VectorXd logw(batch.phi.size());
    for (Eigen::Index i = 0; i < batch.phi.size(); ++i)
      logw[i] = batch.phi[i] >= gamma ? batch.log_l[i] : -kInf;
    if (weights_underflow(logw)) {
      res.nc_reason = "weights collapsed to zero";
      break;
    }
    const WeightedSample ws =
        WeightedSample::from_log_weights(batch.points, std::move(logw));
    if (!ws.has_mass()) {
      res.nc_reason = "weights collapsed to zero";
      break;
    }
    try {
      const Eigen::VectorXd center =
          cfg.family.kind == CovarianceFamily::Kind::FixedMean
              ? *cfg.family.fixed_mean
              : weighted_mean(ws);
      GaussianParams next(
          center, update_covariance(cfg.family, ws, center, cfg.epsilon, n));
      params = smooth_update(next, params, cfg.smoothing_alpha);
    } catch (const ZeroMeanDirectionError&) {
      res.nc_reason = "mean estimate vanished, projection undefined";
      break;
    } catch (const ConfigError&) {
      res.nc_reason = "covariance update lost positive definiteness";
      break;
    }
    ++t;
    batch = draw_batch(ls, params, cfg.sample_size, rng);
    gamma = empirical_quantile(batch.phi, cfg.rho);
    res.trace.push_back({t, gamma, params, ws.effective_sample_size(),
                         ls.evaluations() - start});
  }

  res.iterations = t;
  res.budget = ls.evaluations() - start;
  if (gamma >= 0.0) {
    res.p_hat = final_estimate(batch);
  } else if (res.nc_reason.empty()) {
    res.nc_reason = "maximum iterations reached";
  }
  return res;
}

TrialResult run_ice(const LimitState& ls, const EstimatorConfig& cfg,
                    RngStream& rng) {
  const Eigen::Index n = ls.dim();
  validate(cfg, n);
  if (!(cfg.delta_target > 0.0))
    throw ConfigError("delta_target must be > 0");

  const long start = ls.evaluations();
  GaussianParams params = initial_params(cfg, n);
  TrialResult res;

  // CoV of I{phi >= 0} / F(phi / sigma). All-safe samples have zero mean,
  // which counts as "not yet converged" (cv = +inf).
  const auto indicator_cv = [](const Eigen::VectorXd& phi,
                               double sigma) -> double {
    Eigen::VectorXd values(phi.size());
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
      if (phi[i] >= 0.0) {
        const double ratio = std::isinf(sigma) ? 0.0 : phi[i] / sigma;
        values[i] = 1.0 / standard_normal_cdf(ratio);
      } else {
        values[i] = 0.0;
      }
    }
    try {
      return coefficient_of_variation(values);
    } catch (const ZeroMeanCovError&) {
      return kInf;
    }
  };

  double sigma = kInf;
  Batch batch = draw_batch(ls, params, cfg.sample_size, rng);
  double cv = indicator_cv(batch.phi, sigma);
  res.trace.push_back({0, sigma, params, 0.0, ls.evaluations() - start});

  int t = 0;
  while (cv >= cfg.delta_target && t < cfg.max_iterations) {
    const double sigma_next =
        sigma_search(batch.phi, batch.log_l, sigma, cfg.delta_target);
    Eigen::VectorXd logw(batch.phi.size());
    for (Eigen::Index i = 0; i < batch.phi.size(); ++i)
      logw[i] =
          log_standard_normal_cdf(batch.phi[i] / sigma_next) + batch.log_l[i];
    if (weights_underflow(logw)) {
      res.nc_reason = "weights collapsed to zero";
      break;
    }
    const WeightedSample ws =
        WeightedSample::from_log_weights(batch.points, std::move(logw));
    if (!ws.has_mass()) {
      res.nc_reason = "weights collapsed to zero";
      break;
    }
    try {
      const Eigen::VectorXd center =
          cfg.family.kind == CovarianceFamily::Kind::FixedMean
              ? *cfg.family.fixed_mean
              : weighted_mean(ws);
      GaussianParams next(
          center, update_covariance(cfg.family, ws, center, cfg.epsilon, n));
      params = smooth_update(next, params, cfg.smoothing_alpha);
    } catch (const ZeroMeanDirectionError&) {
      res.nc_reason = "mean estimate vanished, projection undefined";
      break;
    } catch (const ConfigError&) {
      res.nc_reason = "covariance update lost positive definiteness";
      break;
    }
    sigma = sigma_next;
    ++t;
    batch = draw_batch(ls, params, cfg.sample_size, rng);
    cv = indicator_cv(batch.phi, sigma);
    res.trace.push_back({t, sigma, params, ws.effective_sample_size(),
                         ls.evaluations() - start});
  }

  res.iterations = t;
  res.budget = ls.evaluations() - start;
  if (cv < cfg.delta_target) {
    res.p_hat = final_estimate(batch);
  } else if (res.nc_reason.empty()) {
    res.nc_reason = "maximum iterations reached";
  }
  return res;
}

double sigma_search(const Eigen::VectorXd& phi_values,
                    const Eigen::VectorXd& log_likelihoods,
                    double sigma_upper, double delta_target) {
  if (phi_values.size() < 2)
    throw ConfigError("sigma_search: need at least 2 samples");
  if (!(sigma_upper > 0.0)) throw ConfigError("sigma_search: bad upper bound");

  double hi = 10.0 * phi_values.cwiseAbs().maxCoeff();
  if (std::isfinite(sigma_upper)) hi = std::min(hi, sigma_upper);
  if (!(hi > 0.0)) hi = std::isfinite(sigma_upper) ? sigma_upper : 1.0;
  const double lo = 1e-8 * hi;

  // CoV of F(phi_i / sigma) L_i; scale-invariant, so shift log L by its max.
  const double max_log_l = log_likelihoods.maxCoeff();
  const auto objective = [&](double sigma) -> double {
    Eigen::VectorXd w(phi_values.size());
    for (Eigen::Index i = 0; i < phi_values.size(); ++i)
      w[i] = std::exp(log_standard_normal_cdf(phi_values[i] / sigma) +
                      log_likelihoods[i] - max_log_l);
    const double mean = w.mean();
    if (!(mean > 0.0)) return kInf;
    const double ss = (w.array() - mean).square().sum();
    const double cv =
        std::sqrt(ss / static_cast<double>(w.size() - 1)) / mean;
    const double diff = cv - delta_target;
    return diff * diff;
  };

  constexpr int kGridPoints = 200;
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  double best_sigma = hi;
  double best_value = objective(hi);
  // Near-ties keep the larger sigma; the tolerance also absorbs the
  // rounding noise of nominally flat objectives.
  const auto improves = [&](double value) {
    return value < best_value - 1e-9 * (1.0 + std::abs(best_value));
  };
  for (int i = kGridPoints - 1; i >= 0; --i) {
    const double sigma = std::exp(
        log_lo + (log_hi - log_lo) * i / static_cast<double>(kGridPoints - 1));
    const double value = objective(sigma);
    if (improves(value)) {
      best_value = value;
      best_sigma = sigma;
    }
  }

  // Golden-section refinement in log space around the best grid point.
  const double step = (log_hi - log_lo) / static_cast<double>(kGridPoints - 1);
  double a = std::max(log_lo, std::log(best_sigma) - step);
  double b = std::min(log_hi, std::log(best_sigma) + step);
  constexpr double kGolden = 0.61803398874989484820;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = objective(std::exp(x1));
  double f2 = objective(std::exp(x2));
  for (int i = 0; i < 60 && (b - a) > 1e-12; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = objective(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = objective(std::exp(x2));
    }
  }
  const double refined = std::exp(0.5 * (a + b));
  return improves(objective(refined)) ? refined : best_sigma;
}

}  // namespace raresim
