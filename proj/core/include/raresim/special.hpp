#pragma once

namespace raresim {

/// Standard normal CDF, accurate to machine precision via erfc.
double standard_normal_cdf(double x);

/// Standard normal density.
double standard_normal_pdf(double x);

/// log of the standard normal CDF, stable far in the left tail where the
/// CDF itself underflows.
double log_standard_normal_cdf(double x);

/// Regularized lower incomplete gamma P(shape, x). Series for x < shape+1,
/// continued fraction otherwise.
double regularized_lower_gamma(double shape, double x);

/// Inverse CDF of Gamma(shape, rate). Throws std::domain_error unless
/// 0 < p < 1. Relative accuracy 1e-12.
double gamma_inverse_cdf(double p, double shape, double rate);

}  // namespace raresim
