#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "polya/count_tree.hpp"
#include "polya/density.hpp"
#include "polya/divergence.hpp"
#include "polya/errors.hpp"
#include "polya/prior.hpp"
#include "polya/rng.hpp"
#include "polya/specfun.hpp"
#include "polya/tree.hpp"

using namespace polya;
using polya::specfun::digamma;

namespace {

std::vector<std::vector<double>> draw_from(const DensityOracle& f0, std::uint64_t n,
                                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> xs;
  xs.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) xs.push_back(f0.sample(rng));
  return xs;
}

// direct cell-sum entropy of a truncated draw: -sum m log(m 2^depth)
double direct_cell_entropy(const SampledDensity& dens) {
  const double scale = std::ldexp(1.0, dens.depth());
  double acc = 0.0;
  for (double m : dens.cell_masses()) {
    if (m > 0.0) acc += m * std::log(m * scale);
  }
  return -acc;
}

// discretized entropy of f0 at the table depth, straight from cell masses
double discretized_f0_entropy(const CellProbabilityTable& table) {
  const double scale = std::ldexp(1.0, table.depth());
  double acc = 0.0;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << table.depth()); ++v) {
    const double f = table.prob(table.depth(), v);
    if (f > 0.0) acc += f * std::log(f * scale);
  }
  return -acc;
}

SampledDensity random_density(int depth, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> splits(SampledDensity::node_count(depth));
  for (auto& y : splits) y = rng.beta(3.0, 3.0);
  return SampledDensity(PartitionSpec{1}, depth, std::move(splits));
}

}  // namespace

TEST_CASE("cell probabilities of the uniform density are the cell measures") {
  const auto& uniform = density_by_name("uniform");
  const auto table = CellProbabilityTable::from_density(uniform, PartitionSpec{1}, 8);
  CHECK(table.source() == CellProbabilityTable::Source::analytic_cdf);
  for (const BinaryPath& cell :
       {BinaryPath{}, BinaryPath{1}, BinaryPath{0, 1}, BinaryPath{1, 1, 0, 1}}) {
    CHECK(table.prob(cell) == doctest::Approx(cell_measure(cell)).epsilon(1e-14));
  }
}

TEST_CASE("cell probabilities of beta22 match the closed-form CDF") {
  const auto& beta22 = density_by_name("beta22");
  const auto table = CellProbabilityTable::from_density(beta22, PartitionSpec{1}, 6);
  CHECK(std::abs(table.prob(BinaryPath{0}) - 0.5) < 1e-14);
  CHECK(std::abs(table.prob(BinaryPath{0, 0}) - 0.15625) < 1e-14);
  CHECK(std::abs(table.split_ratio(BinaryPath{0, 0}) - 0.3125) < 1e-14);
}

TEST_CASE("cell table additivity and level sums") {
  for (const char* name : {"beta22", "truncnorm", "arcsine", "beta22-uniform"}) {
    const auto& f0 = density_by_name(name);
    const PartitionSpec spec{f0.dimension};
    const auto table = CellProbabilityTable::from_density(f0, spec, 8);
    for (int l = 0; l < 8; ++l) {
      double level_sum = 0.0;
      for (std::uint64_t v = 0; v < (std::uint64_t{1} << l); ++v) {
        const BinaryPath cell = BinaryPath::from_level_index(l, v);
        const double parent = table.prob(cell);
        level_sum += parent;
        CHECK(std::abs(table.prob(cell.child(0)) + table.prob(cell.child(1)) - parent) < 1e-10);
      }
      CHECK(std::abs(level_sum - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("three-dimensional tables deinterleave the coordinates") {
  // custom product density: uniform x beta22 x uniform
  DensityOracle cube;
  cube.name = "unit-cube-test";
  cube.dimension = 3;
  cube.marginals = {density_by_name("uniform").marginals[0],
                    density_by_name("beta22").marginals[0],
                    density_by_name("uniform").marginals[0]};
  const PartitionSpec spec{3};
  const auto table = CellProbabilityTable::from_density(cube, spec, 7);

  // digit 2 (third split) is the first digit of coordinate 3
  CHECK(std::abs(table.prob(BinaryPath{0}) - 0.5) < 1e-14);
  CHECK(std::abs(table.prob(BinaryPath{0, 0}) - 0.25) < 1e-14);
  CHECK(std::abs(table.prob(BinaryPath{0, 0, 0}) - 0.125) < 1e-14);
  // coordinate 2 (beta22) is refined by digits 2 and 5: with both zero it is
  // the cell [0, 0.25), F(0.25) = 0.15625; coordinate 1 spans [0.5, 0.75)
  CHECK(std::abs(table.prob(BinaryPath{1, 0, 1, 0, 0}) - 0.25 * 0.15625 * 0.5) < 1e-14);

  for (int l = 0; l < 7; ++l) {
    double level_sum = 0.0;
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << l); ++v) {
      const BinaryPath cell = BinaryPath::from_level_index(l, v);
      level_sum += table.prob(cell);
      CHECK(std::abs(table.prob(cell.child(0)) + table.prob(cell.child(1)) - table.prob(cell)) <
            1e-12);
    }
    CHECK(std::abs(level_sum - 1.0) < 1e-12);
  }
}

TEST_CASE("quadrature tables agree with analytic CDFs") {
  const auto& beta22 = density_by_name("beta22");
  DensityOracle pdf_only = beta22;
  pdf_only.marginals[0].cdf = nullptr;
  pdf_only.marginals[0].quantile = nullptr;

  const PartitionSpec spec{1};
  const auto exact = CellProbabilityTable::from_density(beta22, spec, 7);
  const auto quad = CellProbabilityTable::from_density(pdf_only, spec, 7);
  CHECK(quad.source() == CellProbabilityTable::Source::quadrature);
  for (std::uint64_t v = 0; v < 128; ++v) {
    CHECK(std::abs(quad.prob(7, v) - exact.prob(7, v)) < 1e-9);
  }
}

TEST_CASE("quadrature failure names the offending cell") {
  DensityOracle nasty = density_by_name("arcsine");
  nasty.marginals[0].cdf = nullptr;
  nasty.marginals[0].quantile = nullptr;
  // the edge cell holds an integrable singularity the budget cannot resolve
  CHECK_THROWS_WITH_AS(CellProbabilityTable::from_density(nasty, PartitionSpec{1}, 4),
                       doctest::Contains("cell"), NumericalError);
}

TEST_CASE("kl series worked examples") {
  const auto& uniform = density_by_name("uniform");
  const auto table = CellProbabilityTable::from_density(uniform, PartitionSpec{1}, 4);

  SUBCASE("identical densities give zero") {
    const SampledDensity flat(PartitionSpec{1}, 2, {0.5, 0.5, 0.5});
    CHECK(std::abs(kl_series(table, flat, 0.0)) < 1e-14);
  }
  SUBCASE("one lopsided split") {
    const SampledDensity tilted(PartitionSpec{1}, 1, {0.75});
    const double expected = std::numbers::ln2 - 0.5 * std::log(3.0);
    CHECK(std::abs(kl_series(table, tilted, 0.0) - expected) < 1e-14);
  }
  SUBCASE("degenerate splits raise the infinite-divergence signal") {
    const SampledDensity broken(PartitionSpec{1}, 1, {0.0});
    CHECK(std::isinf(kl_series(table, broken, 0.0)));
  }
}

TEST_CASE("kl series is non-negative at matched depth") {
  for (const char* name : {"uniform", "beta22", "truncnorm", "arcsine"}) {
    const auto& f0 = density_by_name(name);
    const auto table = CellProbabilityTable::from_density(f0, PartitionSpec{1}, 6);
    const double h_disc = discretized_f0_entropy(table);
    for (std::uint64_t seed = 0; seed < 250; ++seed) {
      // h supplied at matched resolution keeps Gibbs' inequality exact
      const double k = kl_series(table, random_density(6, seed), h_disc);
      CHECK(k >= -1e-9);
    }
  }
}

TEST_CASE("kl of the matched discretization is the discretization residual") {
  // splits taken from the reference table itself: the series then returns
  // H_disc - h_f0, the entropy lost to the finite resolution
  const auto& beta22 = density_by_name("beta22");
  const int depth = 8;
  const auto table = CellProbabilityTable::from_density(beta22, PartitionSpec{1}, depth);

  std::vector<double> splits(SampledDensity::node_count(depth));
  std::size_t pos = 0;
  for (int l = 0; l < depth; ++l) {
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << l); ++v, ++pos) {
      splits[pos] = table.split_ratio(BinaryPath::from_level_index(l + 1, 2 * v));
    }
  }
  const SampledDensity matched(PartitionSpec{1}, depth, std::move(splits));
  const double residual = kl_series(table, matched, *beta22.entropy);
  CHECK(residual >= 0.0);
  CHECK(residual == doctest::Approx(discretized_f0_entropy(table) - *beta22.entropy).epsilon(1e-9));
  CHECK(residual < 1e-4);  // depth-8 discretization of a smooth density
}

TEST_CASE("total variation is non-decreasing in grid depth") {
  const auto& beta22 = density_by_name("beta22");
  const PartitionSpec spec{1};
  const auto table = CellProbabilityTable::from_density(beta22, spec, 9);
  PosteriorTree post{PriorSchedule::exponential(1.0, 3.0),
                     build_count_tree(draw_from(beta22, 200, 5), spec, 9)};
  double previous = 0.0;
  for (int depth = 1; depth <= 9; ++depth) {
    const double tv = total_variation(post, table, depth);
    CHECK(tv >= previous - 1e-12);
    previous = tv;
  }
}

TEST_CASE("entropy series equals the direct cell sum") {
  SUBCASE("worked examples") {
    const SampledDensity flat(PartitionSpec{1}, 3, std::vector<double>(7, 0.5));
    CHECK(std::abs(entropy_series(flat)) < 1e-14);
    const SampledDensity tilted(PartitionSpec{1}, 1, {0.75});
    const double expected = -(0.75 * std::log(1.5) + 0.25 * std::log(0.5));
    CHECK(std::abs(entropy_series(tilted) - expected) < 1e-14);
  }
  SUBCASE("random truncated draws up to depth 10") {
    Rng depth_rng(1);
    double max_diff = 0.0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const int depth = 1 + static_cast<int>(depth_rng.next_u64() % 10);
      const SampledDensity dens = random_density(depth, 7000 + seed);
      max_diff = std::max(max_diff, std::abs(entropy_series(dens) - direct_cell_entropy(dens)));
    }
    CHECK(max_diff < 1e-10);
  }
}

TEST_CASE("series entropy identity for the reference density") {
  // -sum F0(B) log(2 y(f0)) over levels <= j equals the discretized entropy
  for (const char* name : {"beta22", "truncnorm"}) {
    const auto& f0 = density_by_name(name);
    const auto table = CellProbabilityTable::from_density(f0, PartitionSpec{1}, 9);
    double acc = 0.0;
    for (int l = 1; l <= 9; ++l) {
      for (std::uint64_t v = 0; v < (std::uint64_t{1} << l); ++v) {
        const double f = table.prob(l, v);
        if (f <= 0.0) continue;
        acc += f * std::log(2.0 * f / table.prob(l - 1, v >> 1));
      }
    }
    CHECK(std::abs(-acc - discretized_f0_entropy(table)) < 1e-9);
  }
}

TEST_CASE("expected posterior kl closed form with no data") {
  const auto& uniform = density_by_name("uniform");
  const PartitionSpec spec{1};
  const auto table = CellProbabilityTable::from_density(uniform, spec, 8);
  const PriorSchedule prior = PriorSchedule::exponential(1.0, 3.0);
  PosteriorTree post{prior, CountTree(spec, 8)};

  const double got = expected_posterior_kl(table, post, 8, 0.0);
  double expected = 0.0;
  for (int l = 1; l <= 8; ++l) {
    const double a = prior.level_weight(l);
    expected -= std::numbers::ln2 + digamma(a) - digamma(2.0 * a);
  }
  CHECK(std::abs(got - expected) < 1e-12);
  CHECK(got > 0.0);
}

TEST_CASE("expected posterior kl matches Monte Carlo over posterior draws") {
  const auto& beta22 = density_by_name("beta22");
  const PartitionSpec spec{1};
  const int depth = 5;
  const auto table = CellProbabilityTable::from_density(beta22, spec, depth);
  PosteriorTree post{PriorSchedule::exponential(1.0, 3.0),
                     build_count_tree(draw_from(beta22, 60, 17), spec, depth)};
  const double h_disc = discretized_f0_entropy(table);
  const double closed = expected_posterior_kl(table, post, depth, h_disc);

  const int draws = 1000;
  double mc = 0.0, mc_sq = 0.0;
  for (int k = 0; k < draws; ++k) {
    const double v = kl_series(table, sample_density(post, depth, 90000 + k), h_disc);
    mc += v;
    mc_sq += v * v;
  }
  mc /= draws;
  const double se = std::sqrt((mc_sq / draws - mc * mc) / draws);
  CHECK(std::abs(mc - closed) < 3.0 * se);
}

TEST_CASE("expected posterior kl decreases with more data") {
  const auto& beta22 = density_by_name("beta22");
  const PartitionSpec spec{1};
  const int depth = 8;
  const auto table = CellProbabilityTable::from_density(beta22, spec, depth);
  const PriorSchedule prior = PriorSchedule::exponential(1.0, 3.0);

  std::vector<double> medians;
  for (std::uint64_t n : {100u, 1000u, 10000u}) {
    std::vector<double> values;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      PosteriorTree post{prior, build_count_tree(draw_from(beta22, n, 100 * n + seed), spec, depth)};
      values.push_back(expected_posterior_kl(table, post, depth, *beta22.entropy));
    }
    std::sort(values.begin(), values.end());
    medians.push_back(values[values.size() / 2]);
    CHECK(values.front() >= -1e-9);
  }
  CHECK(medians[1] < medians[0]);
  CHECK(medians[2] < medians[1]);
}

TEST_CASE("total variation worked examples and Pinsker") {
  const auto& uniform = density_by_name("uniform");
  const PartitionSpec spec{1};
  const auto table = CellProbabilityTable::from_density(uniform, spec, 6);
  const PriorSchedule prior = PriorSchedule::exponential(1.0, 3.0);

  SUBCASE("prior mean against uniform is exactly zero") {
    PosteriorTree post{prior, CountTree(spec, 6)};
    CHECK(total_variation(post, table, 6) == 0.0);
  }
  SUBCASE("two-cell example") {
    // a posterior whose level-1 predictive masses are (0.75, 0.25)
    PartitionSpec spec1{1};
    std::vector<std::vector<double>> sample;
    // c=1, rho=2: a_1 = 1; two left points, zero right -> (1+2)/(2+2) = 0.75
    sample.push_back({0.2});
    sample.push_back({0.3});
    PosteriorTree post{PriorSchedule::polynomial(1.0, 2.0), build_count_tree(sample, spec1, 1)};
    const auto t1 = CellProbabilityTable::from_density(uniform, spec1, 1);
    CHECK(std::abs(total_variation(post, t1, 1) - 0.25) < 1e-14);
  }
  SUBCASE("chain tv^2 <= expected kl / 2 on posterior draws") {
    const auto& beta22 = density_by_name("beta22");
    const auto tb = CellProbabilityTable::from_density(beta22, spec, 6);
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      PosteriorTree post{prior, build_count_tree(draw_from(beta22, 50, seed), spec, 6)};
      const double tv = total_variation(post, tb, 6);
      const double kl = expected_posterior_kl(tb, post, 6, *beta22.entropy);
      CHECK(tv >= 0.0);
      CHECK(tv <= 1.0);
      CHECK(tv * tv <= 0.5 * kl + 1e-6);
    }
  }
}

TEST_CASE("parcels of the divergence series are uncorrelated under the prior") {
  // empirical pairwise correlation of per-parent parcels over prior draws
  const auto& beta22 = density_by_name("beta22");
  const PartitionSpec spec{1};
  const int depth = 3;
  const auto table = CellProbabilityTable::from_density(beta22, spec, depth);
  PosteriorTree post{PriorSchedule::polynomial(1.0, 3.0), CountTree(spec, depth)};

  const int draws = 10000;
  const int parents = (1 << depth) - 1;  // nodes above the leaf level
  std::vector<std::vector<double>> parcel(parents, std::vector<double>(draws));
  for (int k = 0; k < draws; ++k) {
    const SampledDensity dens = sample_density(post, depth, 2900000 + k);
    int idx = 0;
    for (int l = 0; l < depth; ++l) {
      for (std::uint64_t v = 0; v < (std::uint64_t{1} << l); ++v, ++idx) {
        const double y = dens.split(l, v);
        parcel[idx][k] = table.prob(l + 1, 2 * v) * std::log(2.0 * y) +
                         table.prob(l + 1, 2 * v + 1) * std::log(2.0 * (1.0 - y));
      }
    }
  }
  auto mean_of = [&](const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    return m / xs.size();
  };
  std::vector<double> mean(parents), sd(parents);
  for (int i = 0; i < parents; ++i) {
    mean[i] = mean_of(parcel[i]);
    double acc = 0.0;
    for (double x : parcel[i]) acc += (x - mean[i]) * (x - mean[i]);
    sd[i] = std::sqrt(acc / draws);
  }
  double max_rho = 0.0;
  for (int i = 0; i < parents; ++i) {
    for (int j = i + 1; j < parents; ++j) {
      double cov = 0.0;
      for (int k = 0; k < draws; ++k) cov += (parcel[i][k] - mean[i]) * (parcel[j][k] - mean[j]);
      cov /= draws;
      max_rho = std::max(max_rho, std::abs(cov / (sd[i] * sd[j])));
    }
  }
  CHECK(max_rho < 0.02);
}
