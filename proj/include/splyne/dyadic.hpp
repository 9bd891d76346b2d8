#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

#include "splyne/errors.hpp"

namespace splyne {

/// Exact dyadic rational num / 2^exp2. All mesh coordinates live on a dyadic
/// lattice scaled to the initial grid, so every coordinate appearing anywhere
/// in a mesh is one of these and comparisons are exact, never epsilon-based.
///
/// Normal form: num odd, or num == 0 and exp2 == 0.
struct Dyadic {
  std::int64_t num = 0;
  int exp2 = 0;

  constexpr Dyadic() = default;
  constexpr Dyadic(std::int64_t n, int e) : num(n), exp2(e) { normalize(); }
  constexpr Dyadic(int n) : num(n), exp2(0) {}         // NOLINT: implicit by design
  constexpr Dyadic(std::int64_t n) : num(n), exp2(0) {}  // NOLINT

  constexpr void normalize() {
    if (num == 0) {
      exp2 = 0;
      return;
    }
    while (exp2 > 0 && (num & 1) == 0) {
      num >>= 1;
      --exp2;
    }
  }

  /// Exact: dyadics in our coordinate range are representable in double.
  double to_double() const { return std::ldexp(static_cast<double>(num), -exp2); }

  friend constexpr Dyadic operator+(Dyadic a, Dyadic b) {
    const int e = a.exp2 > b.exp2 ? a.exp2 : b.exp2;
    return Dyadic{(a.num << (e - a.exp2)) + (b.num << (e - b.exp2)), e};
  }
  friend constexpr Dyadic operator-(Dyadic a, Dyadic b) {
    const int e = a.exp2 > b.exp2 ? a.exp2 : b.exp2;
    return Dyadic{(a.num << (e - a.exp2)) - (b.num << (e - b.exp2)), e};
  }
  friend constexpr Dyadic operator-(Dyadic a) { return Dyadic{-a.num, a.exp2}; }
  friend constexpr Dyadic operator*(std::int64_t k, Dyadic a) { return Dyadic{k * a.num, a.exp2}; }

  friend constexpr bool operator==(Dyadic a, Dyadic b) {
    return a.num == b.num && a.exp2 == b.exp2;
  }
  friend constexpr std::strong_ordering operator<=>(Dyadic a, Dyadic b) {
    const int e = a.exp2 > b.exp2 ? a.exp2 : b.exp2;
    const auto lhs = static_cast<__int128>(a.num) << (e - a.exp2);
    const auto rhs = static_cast<__int128>(b.num) << (e - b.exp2);
    return lhs < rhs ? std::strong_ordering::less
         : lhs > rhs ? std::strong_ordering::greater
                     : std::strong_ordering::equal;
  }
};

/// (a + b) / 2, exact.
constexpr Dyadic midpoint(Dyadic a, Dyadic b) {
  const Dyadic s = a + b;
  return Dyadic{s.num, s.exp2 + 1};
}

/// Exact conversion back from a double that is known to be dyadic.
/// Throws config_error for values that are not (NaN, inf, fractional tail).
Dyadic dyadic_from_double(double x);

/// Serialized form "num/2^k" (always explicit, e.g. "3/2^0", "-5/2^3").
std::string to_string(Dyadic d);

/// Parses "num/2^k" or a bare integer.
Dyadic parse_dyadic(const std::string& s);

}  // namespace splyne
