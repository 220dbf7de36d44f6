#include "polya/partition.hpp"

#include <cmath>
#include <limits>

#include "polya/errors.hpp"

namespace polya {

namespace {

void require_valid_spec(const PartitionSpec& spec) {
  if (spec.dimension < 1) throw DomainError("partition dimension must be >= 1");
}

std::uint64_t length_mask(int len) {
  return len >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << len) - 1);
}

}  // namespace

BinaryPath::BinaryPath(std::initializer_list<int> bits) {
  for (int b : bits) {
    if (b != 0 && b != 1) throw DomainError("binary path digits must be 0 or 1");
    *this = child(b);
  }
}

BinaryPath BinaryPath::from_level_index(int level, std::uint64_t index) {
  if (level < 0 || level > kMaxDepth) throw DomainError("path level out of range");
  if (level < 64 && index >> level) throw DomainError("cell index out of range for level");
  BinaryPath p;
  p.length_ = level;
  for (int i = 0; i < level; ++i) {
    std::uint64_t b = (index >> (level - 1 - i)) & 1u;
    p.bits_ |= b << i;
  }
  return p;
}

BinaryPath BinaryPath::parse(std::string_view text) {
  BinaryPath p;
  for (char c : text) {
    if (c != '0' && c != '1') throw DomainError("binary path string must contain only 0/1");
    p = p.child(c - '0');
  }
  return p;
}

int BinaryPath::bit(int i) const {
  if (i < 0 || i >= length_) throw DomainError("path bit index out of range");
  return static_cast<int>((bits_ >> i) & 1u);
}

BinaryPath BinaryPath::child(int b) const {
  if (b != 0 && b != 1) throw DomainError("child selector must be 0 or 1");
  if (length_ >= kMaxDepth) throw NumericalError("binary path exceeds supported depth 64");
  BinaryPath p = *this;
  p.bits_ |= static_cast<std::uint64_t>(b) << length_;
  p.length_ = length_ + 1;
  return p;
}

BinaryPath BinaryPath::parent() const {
  if (length_ == 0) throw DomainError("root path has no parent");
  return prefix(length_ - 1);
}

BinaryPath BinaryPath::prefix(int len) const {
  if (len < 0 || len > length_) throw DomainError("prefix length out of range");
  BinaryPath p;
  p.length_ = len;
  p.bits_ = bits_ & length_mask(len);
  return p;
}

bool BinaryPath::is_ancestor_of(const BinaryPath& other) const {
  return length_ < other.length_ && (other.bits_ & length_mask(length_)) == bits_;
}

std::uint64_t BinaryPath::level_index() const {
  std::uint64_t v = 0;
  for (int i = 0; i < length_; ++i) v = (v << 1) | ((bits_ >> i) & 1u);
  return v;
}

std::string BinaryPath::to_string() const {
  std::string s;
  s.reserve(length_);
  for (int i = 0; i < length_; ++i) s.push_back(((bits_ >> i) & 1u) ? '1' : '0');
  return s;
}

std::size_t BinaryPathHash::operator()(const BinaryPath& p) const noexcept {
  // splitmix64 finalizer over (bits, length)
  std::uint64_t x = p.packed_bits();
  x ^= static_cast<std::uint64_t>(p.length()) * 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return static_cast<std::size_t>(x ^ (x >> 31));
}

double CellBox::volume() const {
  double v = 1.0;
  for (std::size_t c = 0; c < lower.size(); ++c) v *= upper[c] - lower[c];
  return v;
}

bool CellBox::contains(std::span<const double> point) const {
  if (point.size() != lower.size()) return false;
  for (std::size_t c = 0; c < lower.size(); ++c) {
    if (point[c] < lower[c] || point[c] >= upper[c]) return false;
  }
  return true;
}

BinaryPath encode(std::span<const double> point, int depth, const PartitionSpec& spec) {
  require_valid_spec(spec);
  const int p = spec.dimension;
  if (static_cast<int>(point.size()) != p) throw DomainError("point dimension does not match partition");
  if (depth < 1) throw DomainError("encode depth must be >= 1");
  if (depth > BinaryPath::kMaxDepth) throw NumericalError("encode depth exceeds supported path depth 64");
  const int digits_per_coord = (depth + p - 1) / p;
  if (digits_per_coord > std::numeric_limits<double>::digits) {
    throw NumericalError("encode depth exceeds double mantissa precision");
  }
  for (double x : point) {
    if (!(x >= 0.0 && x < 1.0)) throw DomainError("point outside the unit cube [0,1)^p");
  }

  std::vector<double> residual(point.begin(), point.end());
  BinaryPath path;
  for (int k = 0; k < depth; ++k) {
    const int c = k % p;
    residual[c] *= 2.0;  // exact in binary floating point
    int b = residual[c] >= 1.0 ? 1 : 0;
    residual[c] -= b;
    path = path.child(b);
  }
  return path;
}

CellBox cell_bounds(const BinaryPath& path, const PartitionSpec& spec) {
  require_valid_spec(spec);
  const int p = spec.dimension;
  CellBox box;
  box.lower.assign(p, 0.0);
  box.upper.assign(p, 1.0);
  std::vector<double> size(p, 1.0);
  for (int k = 0; k < path.length(); ++k) {
    const int c = k % p;
    size[c] *= 0.5;
    if (path.bit(k)) box.lower[c] += size[c];
  }
  for (int c = 0; c < p; ++c) box.upper[c] = box.lower[c] + size[c];
  return box;
}

double cell_measure(const BinaryPath& path) { return std::ldexp(1.0, -path.length()); }

std::pair<BinaryPath, BinaryPath> children(const BinaryPath& path) {
  return {path.child(0), path.child(1)};
}

}  // namespace polya
