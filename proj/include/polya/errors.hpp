#pragma once

#include <stdexcept>

namespace polya {

// Bad data fed to a numeric routine (point outside the unit cube, empty sample, ...).
class DomainError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numeric procedure failed to converge or was asked to leave its supported range.
class NumericalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed configuration, CLI usage, or input file.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace polya
