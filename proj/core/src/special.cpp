#include "raresim/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace raresim {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
}  // namespace

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double standard_normal_pdf(double x) {
  return std::exp(-0.5 * x * x - kLogSqrt2Pi);
}

double log_standard_normal_cdf(double x) {
  if (x > -10.0) return std::log(standard_normal_cdf(x));
  // Asymptotic expansion of Mills ratio: Phi(x) ~ phi(x)/(-x) * S(x),
  // S(x) = 1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8.
  const double x2 = x * x;
  const double s =
      1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2) +
      105.0 / (x2 * x2 * x2 * x2);
  return -0.5 * x2 - kLogSqrt2Pi - std::log(-x) + std::log(s);
}

namespace {

// Lower series: P(a,x) = x^a e^-x / Gamma(a) * sum x^k / (a)_{k+1}
double lower_gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(a * std::log(x) - x - std::lgamma(a));
}

// Upper continued fraction (Lentz): Q(a,x)
double upper_gamma_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(a * std::log(x) - x - std::lgamma(a));
}

}  // namespace

double regularized_lower_gamma(double shape, double x) {
  if (x <= 0.0) return 0.0;
  if (x < shape + 1.0) return lower_gamma_series(shape, x);
  return 1.0 - upper_gamma_cf(shape, x);
}

double gamma_inverse_cdf(double p, double shape, double rate) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("gamma_inverse_cdf: p must lie in (0, 1)");
  if (!(shape > 0.0 && rate > 0.0))
    throw std::domain_error("gamma_inverse_cdf: shape and rate must be > 0");

  // Bracket the root of P(shape, x) - p in the unit-rate variable.
  double lo = 0.0;
  double hi = shape + 1.0;
  while (regularized_lower_gamma(shape, hi) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e308) throw std::runtime_error("gamma_inverse_cdf: no bracket");
  }
  // Bisection to locate, then Newton to polish.
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (regularized_lower_gamma(shape, mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 5; ++i) {
    const double f = regularized_lower_gamma(shape, x) - p;
    const double pdf =
        std::exp((shape - 1.0) * std::log(x) - x - std::lgamma(shape));
    if (pdf <= 0.0) break;
    const double step = f / pdf;
    const double next = x - step;
    if (next > lo && next < hi) x = next;
    if (std::abs(step) < 1e-14 * x) break;
  }
  return x / rate;
}

}  // namespace raresim
