#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "raresim/gaussian.hpp"
#include "raresim/limit_state.hpp"
#include "raresim/rng.hpp"

namespace raresim {

/// Selects which covariance parameters the adaptive loop estimates.
struct CovarianceFamily {
  enum class Kind {
    Full,              // Eq.-(5)-style full covariance
    Diagonal,          // diagonal only (CEd / iCEd)
    RankOneAlongMean,  // variance along m_{t+1} only (CE-m* / iCE-m*)
    FixedCovariance,   // covariance pinned, mean estimated
    FixedMean          // mean pinned, covariance estimated
  };
  enum class Inner { Full, NorthWestBlock };

  Kind kind = Kind::Full;
  std::optional<StructuredCovariance> fixed_covariance;  // FixedCovariance
  std::optional<Eigen::VectorXd> fixed_mean;             // FixedMean
  Inner inner = Inner::Full;      // FixedMean inner structure
  double block_fraction = 0.75;   // FixedMean north-west block size / n

  static CovarianceFamily full() { return {}; }
  static CovarianceFamily diagonal() {
    CovarianceFamily f;
    f.kind = Kind::Diagonal;
    return f;
  }
  static CovarianceFamily rank_one_along_mean() {
    CovarianceFamily f;
    f.kind = Kind::RankOneAlongMean;
    return f;
  }
  static CovarianceFamily with_fixed_covariance(StructuredCovariance cov);
  static CovarianceFamily with_fixed_mean(Eigen::VectorXd mean,
                                          Inner inner = Inner::Full,
                                          double block_fraction = 0.75);
};

struct EstimatorConfig {
  CovarianceFamily family = CovarianceFamily::full();
  double rho = 0.1;           // CE-type quantile level
  double delta_target = 1.5;  // iCE-type CoV target
  int sample_size = 1000;
  int max_iterations = 10;
  double epsilon = 1e-6;
  double smoothing_alpha = 1.0;  // 1 disables smoothing
  std::uint64_t seed = 0;
  /// Optional non-standard starting density (defaults to N(0, I)).
  std::optional<GaussianParams> initial;
};

/// One adaptation step of the loop, recorded for observability.
struct IterationTrace {
  int t = 0;
  double level = 0.0;  // gamma_t for CE-type, sigma_t for iCE-type
  std::optional<GaussianParams> params;
  double effective_sample_size = 0.0;
  long evaluations_so_far = 0;
};

struct TrialResult {
  std::optional<double> p_hat;  // empty = no convergence
  int iterations = 0;
  long budget = 0;  // total phi evaluations including the final batch
  std::string nc_reason;
  std::vector<IterationTrace> trace;

  bool converged() const { return p_hat.has_value(); }
};

/// p_hat = #{phi(X_i) >= 0} / count with X_i standard normal.
TrialResult crude_monte_carlo(const LimitState& ls, long count,
                              RngStream& rng);

/// Fixed-density IS: p_hat = mean of I{phi >= 0} L.
TrialResult importance_sampling(const LimitState& ls,
                                const GaussianParams& g, long count,
                                RngStream& rng);

/// Multilevel CE with quantile levels; the covariance update is dispatched
/// on cfg.family (full / diagonal / rank-one projection / pinned forms).
TrialResult run_ce(const LimitState& ls, const EstimatorConfig& cfg,
                   RngStream& rng);

/// Improved CE driving the smooth indicator F(phi/sigma) by a CoV schedule.
TrialResult run_ice(const LimitState& ls, const EstimatorConfig& cfg,
                    RngStream& rng);

/// Minimizes (cv(F(phi_i/sigma) L_i) - delta_target)^2 over
/// sigma in (0, sigma_upper]: log-spaced scan plus golden-section
/// refinement. Ties prefer the largest sigma.
double sigma_search(const Eigen::VectorXd& phi_values,
                    const Eigen::VectorXd& log_likelihoods,
                    double sigma_upper, double delta_target);

/// Convex blend alpha * next + (1 - alpha) * previous. Rank-one params are
/// blended component-wise in (m, v); dense forms blend their
/// reconstructions.
GaussianParams smooth_update(const GaussianParams& next,
                             const GaussianParams& previous, double alpha);

}  // namespace raresim
