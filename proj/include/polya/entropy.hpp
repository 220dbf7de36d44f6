#pragma once

#include <cstdint>

#include "polya/count_tree.hpp"
#include "polya/prior.hpp"

namespace polya {

/// First partition level at which every cell holds at most one observation,
/// plus one. Below it the posterior splits are at most one count away from
/// the prior. `capped` is set when ties (or a shallow tree) prevent the
/// singleton level from being reached within the materialized depth.
struct ImpactLevel {
  int level = 0;
  bool capped = false;
};

ImpactLevel max_impact_level(const CountTree& counts);

/// ceil(3 log2 n), clamped to at least 2.
int deterministic_truncation(std::uint64_t n);

/// How the entropy estimator resolves its truncation level.
struct TruncationPolicy {
  enum class Kind {
    max_impact,     // data-driven level, capped by the deterministic rule
    deterministic,  // ceil(3 log2 n)
    fixed,          // caller-supplied level
  };

  Kind kind = Kind::max_impact;
  int fixed_level = 0;
  double tail_tolerance = 1e-10;

  static TruncationPolicy max_impact(double tol = 1e-10) { return {Kind::max_impact, 0, tol}; }
  static TruncationPolicy deterministic(double tol = 1e-10) {
    return {Kind::deterministic, 0, tol};
  }
  static TruncationPolicy fixed(int level, double tol = 1e-10) {
    return {Kind::fixed, level, tol};
  }
};

/// One level's closed-form contribution beyond the truncation level:
/// log 2 + psi(a_l + 1) - psi(2 a_l + 1), evaluated cancellation-free;
/// lies in (0, 1/a_l).
double tail_correction_term(const PriorSchedule& prior, int level);

/// Closed-form per-level contribution of the estimator beyond the truncation
/// level, summed from `from_level`:
///   sum_l  log 2 + psi(a_l + 1) - psi(2 a_l + 1),
/// each term in (0, 1/a_l). Requires a schedule with summable 1/a_l.
double tail_correction(const PriorSchedule& prior, int from_level, double tol);

/// Posterior variance of the plug-in log-density average, truncated at
/// `level` (child levels 1..level):
///   (1/n^2) sum over parents of
///     N0^2 psi1(N0+a) + N1^2 psi1(N1+a) - N^2 psi1(N+2a).
/// Levels past the materialized depth are handled with the closed-form
/// singleton expression once every cell is a singleton.
double posterior_variance(const CountTree& counts, const PriorSchedule& prior, int level);

struct EntropyEstimate {
  double value = 0.0;            // nats
  double posterior_variance = 0.0;
  int truncation_level = 0;      // first level covered by the analytic tail
  double tail_correction = 0.0;  // already folded into value
  int tail_terms_used = 0;
  bool truncation_capped = false;   // singleton level not confirmed in-depth
  bool schedule_warning = false;    // prior growth below the consistency rate
};

/// The Polya Tree differential entropy estimator:
///   value = -(1/n) sum over cells with l(eps) < L of
///             N_eps (log 2 + psi(N_eps + a_l) - psi(N_parent + 2 a_l))
///           - tail_correction(prior, L, tol)
/// where L resolves from the policy. Estimates H(f0) = -int f0 log f0 (nats).
EntropyEstimate entropy_estimate(const CountTree& counts, const PriorSchedule& prior,
                                 const TruncationPolicy& policy);

}  // namespace polya
