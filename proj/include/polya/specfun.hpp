#pragma once

namespace polya::specfun {

/// Digamma psi(x) for x > 0. Upward recurrence to x >= 10, then the
/// Bernoulli-coefficient asymptotic series.
double digamma(double x);

/// psi(x) - log(x), evaluated without the cancellation that kills the
/// direct difference for large x (the result is O(1/x)).
double digamma_minus_log(double x);

/// Trigamma psi1(x) for x > 0; strictly positive and strictly decreasing.
double trigamma(double x);

/// log Gamma(x) for x > 0.
double log_gamma(double x);

}  // namespace polya::specfun
