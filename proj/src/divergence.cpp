#include "polya/divergence.hpp"

#include <cmath>
#include <numbers>

#include "polya/density.hpp"
#include "polya/errors.hpp"
#include "polya/specfun.hpp"

namespace polya {

namespace {

double simpson_rule(double h, double fa, double fm, double fb) {
  return (fa + 4.0 * fm + fb) * h / 6.0;
}

double simpson_recurse(const std::function<double(double)>& f, double a, double m, double b,
                       double fa, double fm, double fb, double whole, double tol, int budget) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_rule(m - a, fa, flm, fm);
  const double right = simpson_rule(b - m, fm, frm, fb);
  const double err = (left + right - whole) / 15.0;
  if (std::abs(err) <= tol) return left + right + err;
  if (budget <= 0) throw NumericalError("adaptive quadrature did not converge");
  return simpson_recurse(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, budget - 1) +
         simpson_recurse(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, budget - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_recursion) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = simpson_rule(b - a, fa, fm, fb);
  return simpson_recurse(f, a, m, b, fa, fm, fb, whole, tol, max_recursion);
}

CellProbabilityTable CellProbabilityTable::from_density(const DensityOracle& f0,
                                                        const PartitionSpec& spec, int depth) {
  if (f0.dimension != spec.dimension) throw DomainError("density dimension does not match partition");
  if (depth < 1) throw DomainError("cell table depth must be >= 1");

  CellProbabilityTable table;
  table.spec_ = spec;
  table.depth_ = depth;
  table.source_ = f0.has_cdf() ? Source::analytic_cdf : Source::quadrature;
  table.marginal_cum_.resize(spec.dimension);

  for (int c = 0; c < spec.dimension; ++c) {
    // digits coordinate c receives among the first `depth` splits
    const int m = c < depth ? (depth - c - 1) / spec.dimension + 1 : 0;
    if (m > 24) throw NumericalError("cell probability table depth too large to materialize");
    const std::uint64_t cells = std::uint64_t{1} << m;
    auto& cum = table.marginal_cum_[c];
    cum.assign(cells + 1, 0.0);
    const Marginal1D& marg = f0.marginals[c];
    if (marg.cdf) {
      const double base = marg.cdf(0.0);
      for (std::uint64_t k = 1; k <= cells; ++k) {
        cum[k] = marg.cdf(std::ldexp(static_cast<double>(k), -m)) - base;
      }
    } else {
      for (std::uint64_t k = 1; k <= cells; ++k) {
        const double lo = std::ldexp(static_cast<double>(k - 1), -m);
        const double hi = std::ldexp(static_cast<double>(k), -m);
        double piece;
        try {
          piece = adaptive_simpson(marg.pdf, lo, hi, 1e-10);
        } catch (const NumericalError&) {
          throw NumericalError("cell probability quadrature failed on coordinate " +
                               std::to_string(c) + " cell [" + std::to_string(lo) + "," +
                               std::to_string(hi) + ")");
        }
        cum[k] = cum[k - 1] + piece;
      }
    }
  }
  return table;
}

double CellProbabilityTable::prob(const BinaryPath& cell) const {
  if (cell.length() > depth_) throw DomainError("cell deeper than the probability table");
  const int p = spec_.dimension;
  double value = 1.0;
  for (int c = 0; c < p; ++c) {
    const int table_digits = c < depth_ ? (depth_ - c - 1) / p + 1 : 0;
    int digits = 0;
    std::uint64_t index = 0;
    for (int k = c; k < cell.length(); k += p) {
      index = (index << 1) | static_cast<std::uint64_t>(cell.bit(k));
      ++digits;
    }
    const auto& cum = marginal_cum_[c];
    const int shift = table_digits - digits;
    value *= cum[(index + 1) << shift] - cum[index << shift];
  }
  return value;
}

double CellProbabilityTable::prob(int level, std::uint64_t index) const {
  return prob(BinaryPath::from_level_index(level, index));
}

double CellProbabilityTable::split_ratio(const BinaryPath& child) const {
  if (child.empty()) throw DomainError("split ratio needs a non-root cell");
  const double parent = prob(child.parent());
  if (parent <= 0.0) return 0.0;
  return prob(child) / parent;
}

double kl_series(const CellProbabilityTable& table, const SampledDensity& dens, double h_f0) {
  if (table.depth() < dens.depth()) throw DomainError("probability table shallower than the draw");
  double cross = 0.0;
  for (int l = 1; l <= dens.depth(); ++l) {
    const std::uint64_t parents = std::uint64_t{1} << (l - 1);
    for (std::uint64_t v = 0; v < parents; ++v) {
      const double y = dens.split(l - 1, v);
      const double f_left = table.prob(l, 2 * v);
      const double f_right = table.prob(l, 2 * v + 1);
      if (f_left > 0.0) {
        if (y <= 0.0) return std::numeric_limits<double>::infinity();
        cross += f_left * std::log(2.0 * y);
      }
      if (f_right > 0.0) {
        if (y >= 1.0) return std::numeric_limits<double>::infinity();
        cross += f_right * std::log(2.0 * (1.0 - y));
      }
    }
  }
  return -h_f0 - cross;
}

double entropy_series(const SampledDensity& dens) {
  // depth-first accumulation of Q(B_eps0) log 2y + Q(B_eps1) log 2(1-y)
  double acc = 0.0;
  std::vector<double> mass(std::size_t{1} << dens.depth(), 1.0);
  for (int l = 0; l < dens.depth(); ++l) {
    const std::uint64_t cells = std::uint64_t{1} << l;
    for (std::uint64_t v = cells; v-- > 0;) {
      const double m = mass[v];
      const double y = dens.split(l, v);
      const double m0 = m * y;
      const double m1 = m * (1.0 - y);
      if (m0 > 0.0) acc += m0 * std::log(2.0 * y);
      if (m1 > 0.0) acc += m1 * std::log(2.0 * (1.0 - y));
      mass[2 * v] = m0;
      mass[2 * v + 1] = m1;
    }
  }
  return -acc;
}

double expected_posterior_kl(const CellProbabilityTable& table, const PosteriorTree& post,
                             int depth, double h_f0) {
  (void)h_f0;  // the matched-depth discretized entropy is reconstructed from the table
  if (depth > table.depth()) throw DomainError("depth exceeds the probability table");
  const double ln2 = std::numbers::ln2;
  double acc = 0.0;
  for (int l = 1; l <= depth; ++l) {
    const double a = post.prior.level_weight(l);
    const std::uint64_t cells = std::uint64_t{1} << l;
    for (std::uint64_t v = 0; v < cells; ++v) {
      const double f = table.prob(l, v);
      if (f <= 0.0) continue;
      const double f_parent = table.prob(l - 1, v >> 1);
      const BinaryPath cell = BinaryPath::from_level_index(l, v);
      const double child = static_cast<double>(post.counts.count(cell));
      const double parent = static_cast<double>(post.counts.parent_count(cell));
      const double post_mean =
          ln2 + specfun::digamma(child + a) - specfun::digamma(parent + 2.0 * a);
      acc += f * (std::log(2.0 * f / f_parent) - post_mean);
    }
  }
  return acc;
}

double total_variation(const PosteriorTree& post, const CellProbabilityTable& f0_table,
                       int grid_depth) {
  if (grid_depth > f0_table.depth()) throw DomainError("grid depth exceeds the probability table");
  const std::vector<double> masses = predictive_cell_masses(post, grid_depth);
  double acc = 0.0;
  for (std::uint64_t v = 0; v < masses.size(); ++v) {
    acc += std::abs(masses[v] - f0_table.prob(grid_depth, static_cast<std::uint64_t>(v)));
  }
  return 0.5 * acc;
}

}  // namespace polya
