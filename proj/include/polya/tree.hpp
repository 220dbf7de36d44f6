#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "polya/count_tree.hpp"
#include "polya/partition.hpp"
#include "polya/prior.hpp"

namespace polya {

/// Conjugate posterior of a Polya Tree prior given a counted sample: the
/// split at cell eps is Beta(a_{l+1} + N_{eps0}, a_{l+1} + N_{eps1}).
struct PosteriorTree {
  PriorSchedule prior;
  CountTree counts;

  const PartitionSpec& spec() const { return counts.spec(); }
};

/// One truncated density draw: independent Beta split variables for every
/// internal node above `depth`, stored level by level in heap order.
class SampledDensity {
 public:
  SampledDensity(PartitionSpec spec, int depth, std::vector<double> splits);

  int depth() const { return depth_; }
  const PartitionSpec& spec() const { return spec_; }

  /// Split probability y of the left child of the internal node at
  /// (level, index); level < depth.
  double split(int level, std::uint64_t index) const;
  double split(const BinaryPath& node) const;

  /// Masses of the 2^depth cells of the deepest level, left to right.
  std::vector<double> cell_masses() const;

  /// log of the piecewise-constant density at a point.
  double log_value_at(std::span<const double> point) const;

  static std::size_t node_count(int depth);

 private:
  PartitionSpec spec_;
  int depth_;
  std::vector<double> splits_;  // node (l, v) lives at (1<<l) - 1 + v
};

/// Posterior Beta parameters of the split below `path`:
/// (a_{l+1} + N_{path.0}, a_{l+1} + N_{path.1}).
std::pair<double, double> posterior_split_params(const PosteriorTree& post,
                                                 const BinaryPath& path);

/// log of the predictive (posterior-mean) density at `point`, truncated at
/// `depth`. Levels with no data contribute exactly zero.
double predictive_log_density(std::span<const double> point, const PosteriorTree& post,
                              int depth);

/// Exact cell masses of the predictive density at `depth` (2^depth values).
std::vector<double> predictive_cell_masses(const PosteriorTree& post, int depth);

/// Draws a truncated density from the posterior. Splits are seeded per node,
/// so deepening the draw with the same seed extends it consistently.
SampledDensity sample_density(const PosteriorTree& post, int depth, std::uint64_t seed);

/// (prod_j min 2y, prod_j max 2y) over the levels of a draw; brackets the
/// infimum and supremum of the piecewise-constant density.
std::pair<double, double> density_envelope(const SampledDensity& dens);

}  // namespace polya
