#pragma once

#include <string>
#include <string_view>

namespace polya {

/// The level-parameter sequence a_l of a Polya Tree prior, restricted to the
/// two growth families used throughout: polynomial a_l = c*l^rho and
/// exponential a_l = c*2^(beta*l). Convergence flags are fixed at
/// construction:
///   - satisfies_abs_continuity:  sum 1/a_l  < inf
///   - satisfies_regularity:      sum l/a_l  < inf
///   - satisfies_entropy_rate:    exponential family with beta > 2
class PriorSchedule {
 public:
  enum class Family { polynomial, exponential };

  static PriorSchedule polynomial(double c, double rho);
  static PriorSchedule exponential(double c, double beta);

  /// Parses "poly:c=1,rho=3" or "exp:c=1,beta=3" (long spellings accepted).
  static PriorSchedule parse(std::string_view text);

  Family family() const { return family_; }
  double scale() const { return c_; }
  double exponent() const { return exponent_; }

  /// a_l for l >= 1. Throws NumericalError on overflow to infinity.
  double level_weight(int level) const;

  bool satisfies_abs_continuity() const { return abs_continuity_; }
  bool satisfies_regularity() const { return regularity_; }
  bool satisfies_entropy_rate() const { return entropy_rate_; }

  /// Upper bound on sum_{l > level} 1/a_l: exact geometric sum for the
  /// exponential family, integral bound for polynomial rho > 1. Requires
  /// satisfies_abs_continuity.
  double inverse_tail_bound(int level) const;

  std::string to_string() const;

 private:
  PriorSchedule(Family family, double c, double exponent);

  Family family_;
  double c_;
  double exponent_;
  bool abs_continuity_;
  bool regularity_;
  bool entropy_rate_;
};

}  // namespace polya
