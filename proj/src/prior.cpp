#include "polya/prior.hpp"

#include <cmath>
#include <sstream>

#include "polya/errors.hpp"

namespace polya {

namespace {

double parse_number(std::string_view text, std::string_view what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(std::string(text), &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("could not parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
}

}  // namespace

PriorSchedule::PriorSchedule(Family family, double c, double exponent)
    : family_(family), c_(c), exponent_(exponent) {
  if (!(c > 0.0)) throw ConfigError("prior scale c must be > 0");
  if (!std::isfinite(exponent)) throw ConfigError("prior exponent must be finite");
  if (family == Family::polynomial) {
    abs_continuity_ = exponent > 1.0;
    regularity_ = exponent > 2.0;
    entropy_rate_ = false;
  } else {
    abs_continuity_ = exponent > 0.0;
    regularity_ = exponent > 0.0;
    entropy_rate_ = exponent > 2.0;
  }
}

PriorSchedule PriorSchedule::polynomial(double c, double rho) {
  return PriorSchedule(Family::polynomial, c, rho);
}

PriorSchedule PriorSchedule::exponential(double c, double beta) {
  return PriorSchedule(Family::exponential, c, beta);
}

PriorSchedule PriorSchedule::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ConfigError("prior must look like 'exp:c=1,beta=3'");
  const std::string_view head = text.substr(0, colon);
  std::string_view rest = text.substr(colon + 1);

  bool exponential_family;
  if (head == "exp" || head == "exponential") {
    exponential_family = true;
  } else if (head == "poly" || head == "polynomial") {
    exponential_family = false;
  } else {
    throw ConfigError("unknown prior family '" + std::string(head) + "' (expected exp or poly)");
  }

  double c = 1.0;
  double exponent = exponential_family ? 3.0 : 3.0;
  while (!rest.empty()) {
    auto comma = rest.find(',');
    std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigError("prior parameter must look like key=value");
    std::string_view key = item.substr(0, eq);
    std::string_view value = item.substr(eq + 1);
    if (key == "c") {
      c = parse_number(value, "prior scale c");
    } else if ((key == "beta" && exponential_family) || (key == "rho" && !exponential_family)) {
      exponent = parse_number(value, "prior exponent");
    } else {
      throw ConfigError("unknown prior parameter '" + std::string(key) + "'");
    }
  }
  return exponential_family ? exponential(c, exponent) : polynomial(c, exponent);
}

double PriorSchedule::level_weight(int level) const {
  if (level < 1) throw DomainError("prior levels are indexed from 1");
  double a;
  if (family_ == Family::polynomial) {
    a = c_ * std::pow(static_cast<double>(level), exponent_);
  } else {
    a = c_ * std::exp2(exponent_ * static_cast<double>(level));
  }
  if (!std::isfinite(a) || !(a > 0.0)) {
    throw NumericalError("prior weight a_l is not a positive finite number at level " +
                         std::to_string(level));
  }
  return a;
}

double PriorSchedule::inverse_tail_bound(int level) const {
  if (!abs_continuity_) throw NumericalError("sum 1/a_l diverges for this schedule");
  if (level < 0) level = 0;
  if (family_ == Family::exponential) {
    const double r = std::exp2(-exponent_);
    return std::pow(r, level + 1) / (c_ * (1.0 - r));
  }
  // sum_{l>L} l^-rho <= int_L^inf t^-rho dt = L^(1-rho)/(rho-1)
  const double l0 = level < 1 ? 1.0 : static_cast<double>(level);
  double bound = std::pow(l0, 1.0 - exponent_) / (c_ * (exponent_ - 1.0));
  if (level < 1) bound += 1.0 / c_;  // include l = 1 explicitly
  return bound;
}

std::string PriorSchedule::to_string() const {
  std::ostringstream out;
  if (family_ == Family::polynomial) {
    out << "poly:c=" << c_ << ",rho=" << exponent_;
  } else {
    out << "exp:c=" << c_ << ",beta=" << exponent_;
  }
  return out.str();
}

}  // namespace polya
