#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <string>

#include "raresim/gaussian.hpp"
#include "raresim/rng.hpp"

namespace raresim {

/// Black-box performance function phi: R^n -> R with failure at phi >= 0.
/// Every evaluation bumps a per-instance counter, which is the only budget
/// accounting the estimators rely on. There is no gradient in the API.
class LimitState {
 public:
  using Fn = std::function<double(const Eigen::VectorXd&)>;

  LimitState(std::string name, Eigen::Index dim, Fn fn)
      : name_(std::move(name)), dim_(dim), fn_(std::move(fn)) {}

  const std::string& name() const { return name_; }
  Eigen::Index dim() const { return dim_; }

  double evaluate(const Eigen::VectorXd& x) const {
    ++evaluations_;
    return fn_(x);
  }

  Eigen::VectorXd evaluate_batch(const Eigen::MatrixXd& points) const {
    Eigen::VectorXd out(points.rows());
    for (Eigen::Index i = 0; i < points.rows(); ++i)
      out[i] = evaluate(points.row(i).transpose());
    return out;
  }

  long evaluations() const { return evaluations_; }
  void reset_counter() { evaluations_ = 0; }

 private:
  std::string name_;
  Eigen::Index dim_;
  Fn fn_;
  mutable long evaluations_ = 0;
};

/// phi(x) = sum_j x_j - 3 sqrt(n); P = Phi(-3) for every n.
LimitState make_linear_sum(Eigen::Index n);

/// Modified Ackley response with direction weights a_j = 2(j-1)/n and
/// threshold c_n: phi(x) = A(x) - c_n.
LimitState make_modified_ackley(Eigen::Index n, double threshold);

/// Portfolio loss, input dimension n + 2 (x1 = U, x2 = mu-tilde, rest =
/// eta-tilde): phi(X) = sum_j I{psi_j >= 0.5 sqrt(n)} - b n.
LimitState make_portfolio(Eigen::Index n, double loss_fraction);

/// phi(x) = x1 - kappa x2^2 - 3, independent of x3..xn.
LimitState make_parabola(Eigen::Index n, double kappa);

/// Calibrates the Ackley threshold c_n so that crude Monte Carlo with
/// `samples` draws (>= 1e7 by default) estimates P(phi >= 0) = target_p.
/// Computed as the empirical (1 - target_p) quantile of the response over a
/// single fixed-seed sample, which bisection over c would converge to.
double calibrate_ackley_threshold(Eigen::Index n, double target_p,
                                  RngStream& rng, long samples = 10'000'000);

/// Analytic CE-optimal parameters for the linear benchmark: truncated
/// normal moments along u = (1,..,1)/sqrt(n), m* = lambda(3) u and
/// Sigma* = I + (v - 1) u u^T with lambda the Mills ratio at 3 and
/// v = 1 + 3 lambda - lambda^2.
GaussianParams linear_optimal_params(Eigen::Index n, double eps = 1e-6);

/// Mills ratio lambda(a) = pdf(a) / Phi(-a).
double mills_ratio(double a);

}  // namespace raresim
