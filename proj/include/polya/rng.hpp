#pragma once

#include <cstdint>

namespace polya {

/// Mixes up to three 64-bit words into one seed (splitmix64 finalizer chain).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0x6A09E667F3BCC909ull,
                       std::uint64_t c = 0xBB67AE8584CAA73Bull);

/// Small deterministic generator with the distributions the samplers need.
/// Everything is hand-rolled (splitmix64 core, Box-Muller normal,
/// Marsaglia-Tsang gamma) so that seeded output does not depend on the
/// standard library's implementation-defined distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  /// Uniform on the open interval (0,1).
  double uniform();

  double normal();

  /// Gamma(shape, scale 1), shape > 0.
  double gamma(double shape);

  /// Beta(a, b) via the ratio of two gamma variates.
  double beta(double a, double b);

 private:
  std::uint64_t state_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace polya
