#include "polya/tree.hpp"

#include <cmath>

#include "polya/errors.hpp"
#include "polya/rng.hpp"

namespace polya {

namespace {

constexpr int kMaxSampleDepth = 24;  // 2^24 - 1 split variables ~ 128 MB, hard stop

}  // namespace

SampledDensity::SampledDensity(PartitionSpec spec, int depth, std::vector<double> splits)
    : spec_(spec), depth_(depth), splits_(std::move(splits)) {
  if (depth < 1) throw DomainError("sampled density depth must be >= 1");
  if (splits_.size() != node_count(depth)) {
    throw DomainError("split vector size does not match depth");
  }
}

std::size_t SampledDensity::node_count(int depth) {
  return (std::size_t{1} << depth) - 1;
}

double SampledDensity::split(int level, std::uint64_t index) const {
  if (level < 0 || level >= depth_) throw DomainError("split level out of range");
  return splits_[((std::size_t{1} << level) - 1) + index];
}

double SampledDensity::split(const BinaryPath& node) const {
  return split(node.length(), node.level_index());
}

std::vector<double> SampledDensity::cell_masses() const {
  std::vector<double> masses(std::size_t{1} << depth_, 1.0);
  // expand level by level: masses[v] for the 2^l cells of level l
  for (int l = 0; l < depth_; ++l) {
    const std::uint64_t cells = std::uint64_t{1} << l;
    for (std::uint64_t v = cells; v-- > 0;) {
      const double m = masses[v];
      const double y = split(l, v);
      masses[2 * v] = m * y;
      masses[2 * v + 1] = m * (1.0 - y);
    }
  }
  return masses;
}

double SampledDensity::log_value_at(std::span<const double> point) const {
  const BinaryPath path = encode(point, depth_, spec_);
  double acc = 0.0;
  for (int l = 1; l <= depth_; ++l) {
    const BinaryPath node = path.prefix(l);
    const double y = split(node.parent());
    acc += std::log(2.0 * (node.bit(l - 1) ? 1.0 - y : y));
  }
  return acc;
}

std::pair<double, double> posterior_split_params(const PosteriorTree& post,
                                                 const BinaryPath& path) {
  const double a = post.prior.level_weight(path.length() + 1);
  const double n0 = static_cast<double>(post.counts.count(path.child(0)));
  const double n1 = static_cast<double>(post.counts.count(path.child(1)));
  return {a + n0, a + n1};
}

double predictive_log_density(std::span<const double> point, const PosteriorTree& post,
                              int depth) {
  if (depth < 1) throw DomainError("predictive depth must be >= 1");
  const BinaryPath path = encode(point, depth, post.spec());
  double acc = 0.0;
  for (int l = 1; l <= depth; ++l) {
    const BinaryPath cell = path.prefix(l);
    const std::uint64_t parent = post.counts.parent_count(cell);
    if (parent == 0) continue;  // symmetric prior mean, log term is exactly 0
    const double a = post.prior.level_weight(l);
    const double child = static_cast<double>(post.counts.count(cell));
    acc += std::log(2.0 * (a + child) / (2.0 * a + static_cast<double>(parent)));
  }
  return acc;
}

std::vector<double> predictive_cell_masses(const PosteriorTree& post, int depth) {
  if (depth < 1) throw DomainError("predictive depth must be >= 1");
  if (depth > kMaxSampleDepth) throw NumericalError("predictive grid depth too large");
  std::vector<double> masses(std::size_t{1} << depth, 1.0);
  for (int l = 0; l < depth; ++l) {
    const std::uint64_t cells = std::uint64_t{1} << l;
    const double a = post.prior.level_weight(l + 1);
    for (std::uint64_t v = cells; v-- > 0;) {
      const BinaryPath node = BinaryPath::from_level_index(l, v);
      const double m = masses[v];
      const std::uint64_t parent = post.counts.count(node);
      double ratio = 0.5;
      if (parent > 0) {
        const double n0 = static_cast<double>(post.counts.count(node.child(0)));
        ratio = (a + n0) / (2.0 * a + static_cast<double>(parent));
      }
      masses[2 * v] = m * ratio;
      masses[2 * v + 1] = m * (1.0 - ratio);
    }
  }
  return masses;
}

SampledDensity sample_density(const PosteriorTree& post, int depth, std::uint64_t seed) {
  if (depth < 1) throw DomainError("sample depth must be >= 1");
  if (depth > kMaxSampleDepth) throw NumericalError("sample depth too large to materialize");
  std::vector<double> splits(SampledDensity::node_count(depth));
  std::size_t pos = 0;
  for (int l = 0; l < depth; ++l) {
    const std::uint64_t cells = std::uint64_t{1} << l;
    for (std::uint64_t v = 0; v < cells; ++v, ++pos) {
      const BinaryPath node = BinaryPath::from_level_index(l, v);
      const auto [alpha, beta] = posterior_split_params(post, node);
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(l) + 1, v));
      splits[pos] = rng.beta(alpha, beta);
    }
  }
  return SampledDensity(post.spec(), depth, std::move(splits));
}

std::pair<double, double> density_envelope(const SampledDensity& dens) {
  double inf = 1.0;
  double sup = 1.0;
  for (int l = 0; l < dens.depth(); ++l) {
    const std::uint64_t cells = std::uint64_t{1} << l;
    double level_min = 2.0;
    double level_max = 0.0;
    for (std::uint64_t v = 0; v < cells; ++v) {
      const double y = dens.split(l, v);
      const double small = 2.0 * std::min(y, 1.0 - y);
      const double large = 2.0 * std::max(y, 1.0 - y);
      if (small < level_min) level_min = small;
      if (large > level_max) level_max = large;
    }
    inf *= level_min;
    sup *= level_max;
  }
  return {inf, sup};
}

}  // namespace polya
