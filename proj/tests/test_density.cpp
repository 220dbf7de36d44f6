#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "oracle_constants.hpp"
#include "polya/density.hpp"
#include "polya/errors.hpp"
#include "polya/rng.hpp"

using namespace polya;

namespace {

// Test-side composite Simpson; independent of the library quadrature.
double composite_simpson(const std::function<double(double)>& g, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double acc = g(a) + g(b);
  for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
  return acc * h / 3.0;
}

double plogp(double f) { return f > 0.0 ? f * std::log(f) : 0.0; }

// -int f log f for a finite-density marginal, straight quadrature
double entropy_by_quadrature(const Marginal1D& m, int panels = 1 << 20) {
  return -composite_simpson([&](double x) { return plogp(m.pdf(x)); }, 0.0, 1.0, panels);
}

// arcsine needs the x = sin^2(u) substitution; the transformed integrand is
// log(pi sin u cos u) with integrable log endpoints handled analytically
double arcsine_entropy_by_quadrature() {
  const double eps = 1e-5;
  auto log_sin_integral = [&] {
    // int_0^{pi/2} log sin u du = analytic edge below eps + Simpson above
    const double edge = eps * std::log(eps) - eps - eps * eps * eps / 18.0;
    const double body = composite_simpson([](double u) { return std::log(std::sin(u)); }, eps,
                                          std::numbers::pi / 2.0, 1 << 20);
    return edge + body;
  };
  const double i_log_sin = log_sin_integral();
  // by symmetry int log cos = int log sin
  return std::log(std::numbers::pi) + 2.0 / std::numbers::pi * 2.0 * i_log_sin;
}

double min_split_ratio(const Marginal1D& m, int max_level) {
  double worst = 1.0;
  for (int l = 1; l <= max_level; ++l) {
    const std::uint64_t cells = std::uint64_t{1} << l;
    for (std::uint64_t v = 0; v < cells; ++v) {
      const double lo = std::ldexp(static_cast<double>(v), -l);
      const double hi = std::ldexp(static_cast<double>(v + 1), -l);
      const double parent = m.cdf(hi) - m.cdf(lo);
      if (parent <= 0.0) continue;
      const double left = m.cdf(0.5 * (lo + hi)) - m.cdf(lo);
      worst = std::min(worst, std::min(left, parent - left) / parent);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("zoo names and lookup") {
  const auto names = density_names();
  CHECK(names.size() == 5);
  CHECK(density_by_name("uniform").dimension == 1);
  CHECK(density_by_name("beta22-uniform").dimension == 2);
  CHECK_THROWS_AS(density_by_name("cauchy"), ConfigError);
}

TEST_CASE("analytic entropies match quadrature") {
  CHECK(std::abs(*density_by_name("uniform").entropy) < 1e-12);
  CHECK(std::abs(entropy_by_quadrature(density_by_name("uniform").marginals[0])) < 1e-9);

  const double beta22_quad = entropy_by_quadrature(density_by_name("beta22").marginals[0]);
  CHECK(std::abs(*density_by_name("beta22").entropy - oracle::kBeta22Entropy) < 1e-13);
  CHECK(std::abs(beta22_quad - oracle::kBeta22Entropy) < 1e-6);

  const double tn_quad = entropy_by_quadrature(density_by_name("truncnorm").marginals[0]);
  CHECK(std::abs(*density_by_name("truncnorm").entropy - oracle::kTruncNormEntropy) < 1e-13);
  CHECK(std::abs(tn_quad - oracle::kTruncNormEntropy) < 1e-6);

  CHECK(std::abs(*density_by_name("arcsine").entropy - oracle::kArcsineEntropy) < 1e-13);
  CHECK(std::abs(arcsine_entropy_by_quadrature() - oracle::kArcsineEntropy) < 1e-6);

  // product density: the uniform factor contributes nothing
  CHECK(*density_by_name("beta22-uniform").entropy == *density_by_name("beta22").entropy);
}

TEST_CASE("densities integrate to one") {
  for (const char* name : {"uniform", "beta22", "truncnorm"}) {
    const auto& m = density_by_name(name).marginals[0];
    CHECK(std::abs(composite_simpson(m.pdf, 0.0, 1.0, 1 << 16) - 1.0) < 1e-8);
    CHECK(std::abs(m.cdf(1.0) - m.cdf(0.0) - 1.0) < 1e-12);
  }
  // arcsine mass via its CDF; the pdf has integrable poles at the edges
  const auto& arcsine = density_by_name("arcsine").marginals[0];
  CHECK(std::abs(arcsine.cdf(1.0) - arcsine.cdf(0.0) - 1.0) < 1e-12);
  for (double x : {0.1, 0.41, 0.77}) {
    const double h = 1e-6;
    const double fd = (arcsine.cdf(x + h) - arcsine.cdf(x - h)) / (2.0 * h);
    CHECK(std::abs(fd - arcsine.pdf(x)) < 1e-5 * arcsine.pdf(x));
  }
}

TEST_CASE("squared l2 norms") {
  const auto& beta22 = density_by_name("beta22").marginals[0];
  const double l2_beta =
      composite_simpson([&](double x) { return beta22.pdf(x) * beta22.pdf(x); }, 0.0, 1.0, 1 << 16);
  CHECK(std::abs(l2_beta - oracle::kBeta22L2) < 1e-8);
  CHECK(*density_by_name("beta22").l2_norm_sq == doctest::Approx(oracle::kBeta22L2));

  const auto& tn = density_by_name("truncnorm").marginals[0];
  const double l2_tn =
      composite_simpson([&](double x) { return tn.pdf(x) * tn.pdf(x); }, 0.0, 1.0, 1 << 16);
  CHECK(std::abs(l2_tn - oracle::kTruncNormL2) < 1e-8);
  CHECK(*density_by_name("truncnorm").l2_norm_sq ==
        doctest::Approx(oracle::kTruncNormL2).epsilon(1e-12));

  CHECK(!density_by_name("arcsine").l2_norm_sq.has_value());
  CHECK(*density_by_name("uniform").l2_norm_sq == 1.0);
}

TEST_CASE("regularity flags span the three regimes") {
  CHECK(density_by_name("uniform").bounded_away);
  CHECK(density_by_name("truncnorm").bounded_away);
  CHECK(!density_by_name("beta22").bounded_away);
  CHECK(!density_by_name("arcsine").bounded_away);
  for (const auto& name : density_names()) {
    const auto& d = density_by_name(name);
    CHECK(d.finite_entropy);
    CHECK(d.split_ratio_bound > 0.0);
  }
}

TEST_CASE("split ratio bounds hold on deep dyadic cells") {
  for (const char* name : {"uniform", "beta22", "arcsine", "truncnorm"}) {
    const auto& d = density_by_name(name);
    const double worst = min_split_ratio(d.marginals[0], 12);
    CHECK(worst >= d.split_ratio_bound - 1e-9);
  }
  // the bounds are tight for the closed-form cases
  CHECK(min_split_ratio(density_by_name("uniform").marginals[0], 8) == doctest::Approx(0.5));
  CHECK(min_split_ratio(density_by_name("beta22").marginals[0], 12) ==
        doctest::Approx(0.25).epsilon(1e-3));
}

TEST_CASE("sampling matches the CDF") {
  for (const char* name : {"uniform", "beta22", "arcsine", "truncnorm"}) {
    const auto& d = density_by_name(name);
    Rng rng(31337);
    const int n = 20000;
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) {
      const auto point = d.sample(rng);
      REQUIRE(point.size() == 1);
      REQUIRE(point[0] >= 0.0);
      REQUIRE(point[0] < 1.0);
      xs[i] = point[0];
    }
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
      const double f = d.marginals[0].cdf(xs[i]);
      ks = std::max(ks, std::abs(f - (i + 1.0) / n));
      ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
    }
    CHECK(ks < 0.02);
  }

  // 2D product draws stay in the unit square and mix the marginals
  const auto& prod = density_by_name("beta22-uniform");
  Rng rng(99);
  double mean0 = 0.0, mean1 = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const auto p = prod.sample(rng);
    REQUIRE(p.size() == 2);
    mean0 += p[0];
    mean1 += p[1];
  }
  CHECK(std::abs(mean0 / 5000 - 0.5) < 0.02);
  CHECK(std::abs(mean1 / 5000 - 0.5) < 0.02);
}

TEST_CASE("bisection quantile inverts the cdf") {
  const auto& beta22 = density_by_name("beta22").marginals[0];
  for (double u : {0.01, 0.2, 0.5, 0.77, 0.999}) {
    const double x = quantile_by_bisection(beta22.cdf, u);
    CHECK(std::abs(beta22.cdf(x) - u) < 1e-12);
  }
}
