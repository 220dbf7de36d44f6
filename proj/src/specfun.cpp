#include "polya/specfun.hpp"

#include <cmath>

#include "polya/errors.hpp"

namespace polya::specfun {

namespace {

constexpr double kShiftThreshold = 10.0;

}  // namespace

namespace {

// psi(x) - ln x for x at or above the shift threshold: the pure asymptotic
// remainder -1/(2x) - sum_k B_{2k}/(2k x^{2k}); below 5e-17 absolute error
// for x >= 10, and free of the ln x cancellation.
double asymptotic_remainder(double x) {
  const double w = 1.0 / (x * x);
  double series = 1.0 / 12.0 -
                  w * (1.0 / 120.0 -
                       w * (1.0 / 252.0 -
                            w * (1.0 / 240.0 -
                                 w * (1.0 / 132.0 -
                                      w * (691.0 / 32760.0 - w * (1.0 / 12.0))))));
  return -0.5 / x - w * series;
}

}  // namespace

double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma requires x > 0");
  double acc = 0.0;
  while (x < kShiftThreshold) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  return acc + std::log(x) + asymptotic_remainder(x);
}

double digamma_minus_log(double x) {
  if (!(x > 0.0)) throw DomainError("digamma requires x > 0");
  if (x >= kShiftThreshold) return asymptotic_remainder(x);
  return digamma(x) - std::log(x);
}

double trigamma(double x) {
  if (!(x > 0.0)) throw DomainError("trigamma requires x > 0");
  double acc = 0.0;
  while (x < kShiftThreshold) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  // psi1(x) = 1/x + 1/(2x^2) + sum_k B_{2k} / x^{2k+1}
  const double w = 1.0 / (x * x);
  double series = 1.0 / 6.0 -
                  w * (1.0 / 30.0 -
                       w * (1.0 / 42.0 -
                            w * (1.0 / 30.0 -
                                 w * (5.0 / 66.0 -
                                      w * (691.0 / 2730.0 - w * (7.0 / 6.0))))));
  return acc + 1.0 / x + 0.5 * w + w / x * series;
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma requires x > 0");
  return std::lgamma(x);
}

}  // namespace polya::specfun
