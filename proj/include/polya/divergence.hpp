#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "polya/partition.hpp"
#include "polya/tree.hpp"

namespace polya {

class DensityOracle;  // density.hpp

/// Adaptive Simpson integration of `f` over [a, b] to absolute tolerance
/// `tol`. Throws NumericalError when the recursion budget is exhausted.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_recursion = 52);

/// Cell probabilities F0(B_eps) of a reference density for every cell with
/// l(eps) <= depth. Built from per-coordinate cumulative grids (exact CDF
/// differences when the oracle has one, adaptive quadrature otherwise), so
/// sibling additivity F0(B_eps0) + F0(B_eps1) = F0(B_eps) holds by
/// construction.
class CellProbabilityTable {
 public:
  enum class Source { analytic_cdf, quadrature };

  static CellProbabilityTable from_density(const DensityOracle& f0, const PartitionSpec& spec,
                                           int depth);

  int depth() const { return depth_; }
  Source source() const { return source_; }
  const PartitionSpec& spec() const { return spec_; }

  double prob(const BinaryPath& cell) const;
  double prob(int level, std::uint64_t index) const;

  /// y_eps(f0) = F0(child) / F0(parent); 0 when the parent carries no mass.
  double split_ratio(const BinaryPath& child) const;

 private:
  PartitionSpec spec_;
  int depth_ = 0;
  Source source_ = Source::analytic_cdf;
  // marginal_cum_[c][k] = F0 mass of coordinate c below k * 2^-m_c
  std::vector<std::vector<double>> marginal_cum_;
};

/// Truncated series for K(f0, theta) given a density draw:
///   K = -h_f0 - sum over cells with l(eps) <= dens.depth of
///         F0(B_eps) log(2 Y_eps).
/// `h_f0` is the differential entropy -int f0 log f0 of the reference
/// density. Returns +infinity when a cell with positive F0 mass meets a
/// degenerate split.
double kl_series(const CellProbabilityTable& table, const SampledDensity& dens, double h_f0);

/// Exact differential entropy of a truncated draw via the split series:
///   H = -sum over parents of Q(B_eps0) log 2y + Q(B_eps1) log 2(1-y),
/// with 0 log 0 read as 0.
double entropy_series(const SampledDensity& dens);

/// Posterior-expected KL divergence at matched truncation depth:
///   sum over cells of F0(B_eps) (log(2 F0(B_eps)/F0(parent)) - E[log 2Y_eps | data]).
double expected_posterior_kl(const CellProbabilityTable& table, const PosteriorTree& post,
                             int depth, double h_f0);

/// Total variation between the predictive density and the reference at a
/// dyadic grid: 0.5 * sum over depth-`grid_depth` cells of |mass difference|.
double total_variation(const PosteriorTree& post, const CellProbabilityTable& f0_table,
                       int grid_depth);

}  // namespace polya
