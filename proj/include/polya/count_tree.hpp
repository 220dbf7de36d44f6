#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "polya/partition.hpp"

namespace polya {

/// Sparse map from partition cells to sample counts N_eps, materialized down
/// to a fixed depth. Only branches that hold at least one observation are
/// stored; absent cells read as zero. Parent-sum invariant:
/// N_{eps0} + N_{eps1} = N_eps at every materialized level.
class CountTree {
 public:
  CountTree(PartitionSpec spec, int max_depth);

  /// Adds one observation, incrementing the counts of all its path prefixes.
  void insert(std::span<const double> point);

  std::uint64_t count(const BinaryPath& path) const;

  /// Count of the parent cell; the root cell holds the full sample.
  std::uint64_t parent_count(const BinaryPath& path) const;

  std::uint64_t total() const { return total_; }
  int max_depth() const { return max_depth_; }
  const PartitionSpec& spec() const { return spec_; }

  /// Largest count among the materialized cells of a level (0 if none).
  std::uint64_t level_max(int level) const;

  const std::unordered_map<BinaryPath, std::uint64_t, BinaryPathHash>& nodes() const {
    return nodes_;
  }

 private:
  PartitionSpec spec_;
  int max_depth_;
  std::uint64_t total_ = 0;
  std::unordered_map<BinaryPath, std::uint64_t, BinaryPathHash> nodes_;
  std::vector<std::uint64_t> level_max_;  // index l-1 holds the level-l maximum
};

/// Builds the count tree of a sample; throws DomainError naming the offending
/// row when a point falls outside [0,1)^p.
CountTree build_count_tree(const std::vector<std::vector<double>>& sample,
                           const PartitionSpec& spec, int max_depth);

}  // namespace polya
