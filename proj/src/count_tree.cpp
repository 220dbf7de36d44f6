#include "polya/count_tree.hpp"

#include <string>

#include "polya/errors.hpp"

namespace polya {

CountTree::CountTree(PartitionSpec spec, int max_depth) : spec_(spec), max_depth_(max_depth) {
  if (spec.dimension < 1) throw DomainError("partition dimension must be >= 1");
  if (max_depth < 1) throw DomainError("count tree depth must be >= 1");
  level_max_.assign(static_cast<std::size_t>(max_depth), 0);
}

void CountTree::insert(std::span<const double> point) {
  const BinaryPath path = encode(point, max_depth_, spec_);
  for (int len = 1; len <= max_depth_; ++len) {
    const std::uint64_t c = ++nodes_[path.prefix(len)];
    if (c > level_max_[len - 1]) level_max_[len - 1] = c;
  }
  ++total_;
}

std::uint64_t CountTree::count(const BinaryPath& path) const {
  if (path.empty()) return total_;
  auto it = nodes_.find(path);
  return it == nodes_.end() ? 0 : it->second;
}

std::uint64_t CountTree::parent_count(const BinaryPath& path) const {
  if (path.empty()) throw DomainError("root cell has no parent");
  return path.length() == 1 ? total_ : count(path.parent());
}

std::uint64_t CountTree::level_max(int level) const {
  if (level < 1 || level > max_depth_) return 0;
  return level_max_[level - 1];
}

CountTree build_count_tree(const std::vector<std::vector<double>>& sample,
                           const PartitionSpec& spec, int max_depth) {
  CountTree tree(spec, max_depth);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    try {
      tree.insert(sample[i]);
    } catch (const DomainError& e) {
      throw DomainError("sample row " + std::to_string(i) + ": " + e.what());
    }
  }
  return tree;
}

}  // namespace polya
