#include "polya/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "polya/errors.hpp"
#include "polya/specfun.hpp"

namespace polya {

namespace {

constexpr long kMaxTailTerms = 5'000'000;

// log 2 + psi(a+1) - psi(2a+1), arranged so the O(1/a) result survives in
// doubles for arbitrarily large a: the log parts collapse to log1p(1/(2a+1)).
double entropy_tail_term(const PriorSchedule& prior, int level) {
  const double a = prior.level_weight(level);
  return std::log1p(1.0 / (2.0 * a + 1.0)) + specfun::digamma_minus_log(a + 1.0) -
         specfun::digamma_minus_log(2.0 * a + 1.0);
}

double variance_tail_term(const PriorSchedule& prior, int level) {
  const double a = prior.level_weight(level);
  return specfun::trigamma(a + 1.0) - specfun::trigamma(2.0 * a + 1.0);
}

struct TailSum {
  double value = 0.0;
  int terms = 0;
};

// Shared accumulation loop: the primary stop is the per-term rule
// |term_l| < tol * 2^-(l - from); the certificate sum_{l'>l} 1/a_l' < tol
// covers schedules whose terms shrink slower than geometrically.
template <class TermFn>
TailSum accumulate_tail(const PriorSchedule& prior, int from_level, double tol, TermFn term_fn) {
  if (!prior.satisfies_abs_continuity()) {
    throw NumericalError("tail correction diverges: schedule has non-summable 1/a_l");
  }
  if (from_level < 1) throw DomainError("tail correction starts at level >= 1");
  if (!(tol > 0.0)) throw DomainError("tail tolerance must be > 0");

  TailSum sum;
  double threshold = tol;
  for (int l = from_level;; ++l) {
    const double term = term_fn(prior, l);
    sum.value += term;
    ++sum.terms;
    if (std::abs(term) < threshold) break;
    if (prior.inverse_tail_bound(l) < tol) break;
    if (sum.terms >= kMaxTailTerms) {
      throw NumericalError("tail correction did not converge within the term budget");
    }
    threshold *= 0.5;
  }
  return sum;
}

double variance_parcel(double n0, double n1, double a) {
  double acc = 0.0;
  if (n0 > 0.0) acc += n0 * n0 * specfun::trigamma(n0 + a);
  if (n1 > 0.0) acc += n1 * n1 * specfun::trigamma(n1 + a);
  const double np = n0 + n1;
  if (np > 0.0) acc -= np * np * specfun::trigamma(np + 2.0 * a);
  return acc;
}

}  // namespace

ImpactLevel max_impact_level(const CountTree& counts) {
  if (counts.total() == 0) throw DomainError("impact level undefined for an empty sample");
  for (int j = 1; j <= counts.max_depth(); ++j) {
    if (counts.level_max(j) == 1) return {j + 1, false};
  }
  return {counts.max_depth() + 1, true};
}

int deterministic_truncation(std::uint64_t n) {
  if (n < 1) throw DomainError("sample size must be >= 1");
  const double raw = 3.0 * std::log2(static_cast<double>(n));
  // snap to integers reached exactly at powers of two before taking the ceiling
  const double snapped = std::abs(raw - std::round(raw)) < 1e-9 ? std::round(raw) : raw;
  const int level = static_cast<int>(std::ceil(snapped));
  return std::max(level, 2);
}

double tail_correction_term(const PriorSchedule& prior, int level) {
  return entropy_tail_term(prior, level);
}

double tail_correction(const PriorSchedule& prior, int from_level, double tol) {
  return accumulate_tail(prior, from_level, tol, entropy_tail_term).value;
}

double posterior_variance(const CountTree& counts, const PriorSchedule& prior, int level) {
  const double n = static_cast<double>(counts.total());
  if (counts.total() == 0) throw DomainError("posterior variance undefined for an empty sample");
  if (level < 1) return 0.0;

  const int explicit_level = std::min(level, counts.max_depth());
  double acc = variance_parcel(static_cast<double>(counts.count(BinaryPath{0})),
                               static_cast<double>(counts.count(BinaryPath{1})),
                               prior.level_weight(1));
  for (const auto& [path, cnt] : counts.nodes()) {
    if (path.length() > explicit_level - 1) continue;
    acc += variance_parcel(static_cast<double>(counts.count(path.child(0))),
                           static_cast<double>(counts.count(path.child(1))),
                           prior.level_weight(path.length() + 1));
  }
  acc /= n * n;

  if (level > counts.max_depth()) {
    // beyond materialization each observation sits alone, so every level
    // contributes n identical singleton parcels
    if (counts.level_max(counts.max_depth()) > 1) {
      throw NumericalError("posterior variance level exceeds the materialized depth");
    }
    for (int l = counts.max_depth() + 1; l <= level; ++l) {
      acc += variance_tail_term(prior, l) / n;
    }
  }
  return std::max(acc, 0.0);
}

EntropyEstimate entropy_estimate(const CountTree& counts, const PriorSchedule& prior,
                                 const TruncationPolicy& policy) {
  const std::uint64_t n = counts.total();
  if (n == 0) throw DomainError("entropy estimate undefined for an empty sample");

  EntropyEstimate est;
  est.schedule_warning = !prior.satisfies_entropy_rate();

  int level = 0;
  switch (policy.kind) {
    case TruncationPolicy::Kind::fixed:
      if (policy.fixed_level < 1) throw DomainError("fixed truncation level must be >= 1");
      level = policy.fixed_level;
      break;
    case TruncationPolicy::Kind::deterministic:
      level = deterministic_truncation(n);
      break;
    case TruncationPolicy::Kind::max_impact: {
      const ImpactLevel impact = max_impact_level(counts);
      const int cap = deterministic_truncation(n);
      level = std::min(impact.level, cap);
      est.truncation_capped = impact.capped && impact.level <= cap;
      break;
    }
  }
  if (level > counts.max_depth() + 1) {
    level = counts.max_depth() + 1;
    est.truncation_capped = true;
  }

  const double ln2 = std::numbers::ln2;
  double acc = 0.0;
  for (const auto& [path, cnt] : counts.nodes()) {
    const int l = path.length();
    if (l >= level) continue;
    const double a = prior.level_weight(l);
    const double child = static_cast<double>(cnt);
    const double parent = static_cast<double>(counts.parent_count(path));
    acc += child * (ln2 + specfun::digamma(child + a) - specfun::digamma(parent + 2.0 * a));
  }

  const TailSum tail = accumulate_tail(prior, level, policy.tail_tolerance, entropy_tail_term);
  est.value = -acc / static_cast<double>(n) - tail.value;
  est.truncation_level = level;
  est.tail_correction = tail.value;
  est.tail_terms_used = tail.terms;

  est.posterior_variance = posterior_variance(counts, prior, level - 1);
  const TailSum var_tail =
      accumulate_tail(prior, level, policy.tail_tolerance, variance_tail_term);
  est.posterior_variance += var_tail.value / static_cast<double>(n);
  return est;
}

}  // namespace polya
