#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polya/rng.hpp"

namespace polya {

/// One coordinate of a product-form reference density on [0,1]. `cdf` and
/// `quantile` are optional; sampling falls back to bisection on the CDF.
struct Marginal1D {
  std::function<double(double)> pdf;
  std::function<double(double)> cdf;
  std::function<double(double)> quantile;
};

/// A known density on [0,1]^p with the metadata the experiments need:
/// analytic entropy when available, squared L2 norm for the spacing law, and
/// the regularity flags (finite entropy, split-ratio lower bound, bounded
/// away from 0 and infinity).
class DensityOracle {
 public:
  std::string name;
  int dimension = 1;
  std::vector<Marginal1D> marginals;
  std::optional<double> entropy;      // nats
  std::optional<double> l2_norm_sq;   // int f^2, when finite
  bool finite_entropy = true;
  double split_ratio_bound = 0.0;     // infimum of F0(child)/F0(parent)
  bool bounded_away = false;          // inf f > 0 and sup f < inf

  double pdf(std::span<const double> point) const;
  bool has_cdf() const;

  /// Inverse-transform draw, one uniform per coordinate; always lands in
  /// [0,1)^p.
  std::vector<double> sample(Rng& rng) const;
};

/// Built-in reference densities: uniform, beta22, arcsine, truncnorm,
/// beta22-uniform (2D product). Throws ConfigError for unknown names.
const DensityOracle& density_by_name(std::string_view name);

std::vector<std::string> density_names();

/// Solves cdf(x) = u on [0,1] by bisection; deterministic and monotone.
double quantile_by_bisection(const std::function<double(double)>& cdf, double u);

}  // namespace polya
