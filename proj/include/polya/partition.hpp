#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace polya {

/// A finite binary sequence indexing one cell of the dyadic partition tree.
/// Bit i (0-based) is the (i+1)-th split decision from the root; the empty
/// path denotes the root cell [0,1)^p. Stored as (length, packed bits), so
/// depths up to 64 are supported exactly.
class BinaryPath {
 public:
  static constexpr int kMaxDepth = 64;

  constexpr BinaryPath() = default;
  BinaryPath(std::initializer_list<int> bits);

  /// Path at `level` whose bits spell `index` most-significant-first, i.e.
  /// the index of the cell within its level counted left to right.
  static BinaryPath from_level_index(int level, std::uint64_t index);

  /// Parses a string of '0'/'1' characters, e.g. "100".
  static BinaryPath parse(std::string_view text);

  int length() const { return length_; }
  bool empty() const { return length_ == 0; }
  int bit(int i) const;

  BinaryPath child(int b) const;
  BinaryPath parent() const;
  BinaryPath prefix(int len) const;

  /// True when *this is a proper prefix (ancestor) of `other`.
  bool is_ancestor_of(const BinaryPath& other) const;

  /// Left-to-right position of the cell among the 2^length cells of its level.
  std::uint64_t level_index() const;

  std::uint64_t packed_bits() const { return bits_; }

  std::string to_string() const;

  friend bool operator==(const BinaryPath&, const BinaryPath&) = default;

 private:
  std::uint64_t bits_ = 0;  // bit i of the path lives at binary position i
  int length_ = 0;
};

struct BinaryPathHash {
  std::size_t operator()(const BinaryPath& p) const noexcept;
};

/// The canonical dyadic partition of [0,1]^p with the cyclic coordinate
/// schedule: split digit k refines coordinate (k-1) mod p.
struct PartitionSpec {
  int dimension = 1;
};

/// Axis-aligned box realizing a partition cell; half-open on every axis.
struct CellBox {
  std::vector<double> lower;
  std::vector<double> upper;

  double volume() const;
  bool contains(std::span<const double> point) const;
};

/// Returns the unique length-`depth` path whose cell contains `point`.
/// Points on dyadic boundaries belong to the upper cell. Throws DomainError
/// for points outside [0,1)^p and NumericalError when the requested depth
/// needs more binary digits per coordinate than a double can hold.
BinaryPath encode(std::span<const double> point, int depth, const PartitionSpec& spec);

/// Geometric realization of the cell indexed by `path`.
CellBox cell_bounds(const BinaryPath& path, const PartitionSpec& spec);

/// Lebesgue measure of the cell: exactly 2^-length.
double cell_measure(const BinaryPath& path);

/// The two children obtained by appending 0 and 1.
std::pair<BinaryPath, BinaryPath> children(const BinaryPath& path);

}  // namespace polya
