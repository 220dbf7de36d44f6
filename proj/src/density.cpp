#include "polya/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "polya/errors.hpp"

namespace polya {

namespace {

constexpr double kBeta22Entropy = -0.12509280256138833;    // ln B(2,2) - 2 psi(2) + 2 psi(4)
constexpr double kArcsineEntropy = -0.24156447527049044;   // ln pi - 2 ln 2
constexpr double kTruncNormEntropy = -0.24736829382563656; // mu=0.5 sigma=0.2 on [0,1]
constexpr double kTruncNormL2 = 1.4455833524744528;

double std_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

Marginal1D uniform_marginal() {
  Marginal1D m;
  m.pdf = [](double) { return 1.0; };
  m.cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  m.quantile = [](double u) { return u; };
  return m;
}

Marginal1D beta22_marginal() {
  Marginal1D m;
  m.pdf = [](double x) { return 6.0 * x * (1.0 - x); };
  m.cdf = [](double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
  };
  return m;
}

Marginal1D arcsine_marginal() {
  Marginal1D m;
  m.pdf = [](double x) {
    if (x <= 0.0 || x >= 1.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (std::numbers::pi * std::sqrt(x * (1.0 - x)));
  };
  m.cdf = [](double x) {
    x = std::clamp(x, 0.0, 1.0);
    return 2.0 / std::numbers::pi * std::asin(std::sqrt(x));
  };
  m.quantile = [](double u) {
    const double s = std::sin(0.5 * std::numbers::pi * u);
    return s * s;
  };
  return m;
}

Marginal1D truncnorm_marginal(double mu, double sigma) {
  const double alpha = (0.0 - mu) / sigma;
  const double beta = (1.0 - mu) / sigma;
  const double z = std_normal_cdf(beta) - std_normal_cdf(alpha);
  Marginal1D m;
  m.pdf = [=](double x) { return std_normal_pdf((x - mu) / sigma) / (sigma * z); };
  m.cdf = [=](double x) {
    x = std::clamp(x, 0.0, 1.0);
    return (std_normal_cdf((x - mu) / sigma) - std_normal_cdf(alpha)) / z;
  };
  return m;
}

std::vector<DensityOracle> build_zoo() {
  std::vector<DensityOracle> zoo;

  {
    DensityOracle d;
    d.name = "uniform";
    d.dimension = 1;
    d.marginals = {uniform_marginal()};
    d.entropy = 0.0;
    d.l2_norm_sq = 1.0;
    d.finite_entropy = true;
    d.split_ratio_bound = 0.5;
    d.bounded_away = true;
    zoo.push_back(std::move(d));
  }
  {
    DensityOracle d;
    d.name = "beta22";
    d.dimension = 1;
    d.marginals = {beta22_marginal()};
    d.entropy = kBeta22Entropy;
    d.l2_norm_sq = 1.2;
    d.finite_entropy = true;
    d.split_ratio_bound = 0.25;  // edge-cell limit of F(half)/F(cell)
    d.bounded_away = false;      // vanishes at both edges
    zoo.push_back(std::move(d));
  }
  {
    DensityOracle d;
    d.name = "arcsine";  // Beta(1/2,1/2), unbounded at the edges
    d.dimension = 1;
    d.marginals = {arcsine_marginal()};
    d.entropy = kArcsineEntropy;
    d.l2_norm_sq = std::nullopt;  // int f^2 diverges
    d.finite_entropy = true;
    d.split_ratio_bound = 1.0 - 1.0 / std::numbers::sqrt2;
    d.bounded_away = false;
    zoo.push_back(std::move(d));
  }
  {
    DensityOracle d;
    d.name = "truncnorm";  // N(0.5, 0.2^2) restricted to [0,1]
    d.dimension = 1;
    d.marginals = {truncnorm_marginal(0.5, 0.2)};
    d.entropy = kTruncNormEntropy;
    d.l2_norm_sq = kTruncNormL2;
    d.finite_entropy = true;
    const double inf_over_sup = d.marginals[0].pdf(0.0) / d.marginals[0].pdf(0.5);
    d.split_ratio_bound = 0.5 * inf_over_sup;
    d.bounded_away = true;
    zoo.push_back(std::move(d));
  }
  {
    DensityOracle d;
    d.name = "beta22-uniform";  // product density on the unit square
    d.dimension = 2;
    d.marginals = {beta22_marginal(), uniform_marginal()};
    d.entropy = kBeta22Entropy;  // product entropy, uniform factor adds 0
    d.l2_norm_sq = 1.2;
    d.finite_entropy = true;
    d.split_ratio_bound = 0.25;
    d.bounded_away = false;
    zoo.push_back(std::move(d));
  }
  return zoo;
}

const std::vector<DensityOracle>& zoo() {
  static const std::vector<DensityOracle> instance = build_zoo();
  return instance;
}

}  // namespace

double DensityOracle::pdf(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != dimension) {
    throw DomainError("point dimension does not match density");
  }
  double v = 1.0;
  for (int c = 0; c < dimension; ++c) v *= marginals[c].pdf(point[c]);
  return v;
}

bool DensityOracle::has_cdf() const {
  for (const auto& m : marginals) {
    if (!m.cdf) return false;
  }
  return true;
}

std::vector<double> DensityOracle::sample(Rng& rng) const {
  std::vector<double> point(dimension);
  for (int c = 0; c < dimension; ++c) {
    const double u = rng.uniform();
    double x;
    if (marginals[c].quantile) {
      x = marginals[c].quantile(u);
    } else if (marginals[c].cdf) {
      x = quantile_by_bisection(marginals[c].cdf, u);
    } else {
      throw NumericalError("density '" + name + "' has no CDF to sample from");
    }
    point[c] = std::clamp(x, 0.0, std::nextafter(1.0, 0.0));
  }
  return point;
}

const DensityOracle& density_by_name(std::string_view name) {
  for (const auto& d : zoo()) {
    if (d.name == name) return d;
  }
  throw ConfigError("unknown density '" + std::string(name) + "'");
}

std::vector<std::string> density_names() {
  std::vector<std::string> names;
  names.reserve(zoo().size());
  for (const auto& d : zoo()) names.push_back(d.name);
  return names;
}

double quantile_by_bisection(const std::function<double(double)>& cdf, double u) {
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 64; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace polya
