#include "splyne/dyadic.hpp"

#include <cctype>
#include <cstdlib>

namespace splyne {

Dyadic dyadic_from_double(double x) {
  if (!std::isfinite(x)) throw config_error("dyadic_from_double: non-finite value");
  if (x == 0.0) return Dyadic{};
  int e = 0;
  const double m = std::frexp(x, &e);  // x = m * 2^e, |m| in [0.5, 1)
  // m * 2^53 is an integer for every double; strip trailing zero bits after.
  const double scaled = std::ldexp(m, 53);
  const auto num = static_cast<std::int64_t>(scaled);
  if (static_cast<double>(num) != scaled)
    throw config_error("dyadic_from_double: value is not dyadic in range");
  const int exp2 = 53 - e;
  if (exp2 < 0) return Dyadic{num << (-exp2), 0};
  Dyadic d{num, exp2};
  // Any double is formally m * 2^e; what we accept are lattice coordinates,
  // which in practice have tiny denominators. A full-width mantissa tail
  // signals a value like 1/3 that was never dyadic to begin with.
  if (d.exp2 > 40) throw config_error("dyadic_from_double: value is not a lattice coordinate");
  return d;
}

std::string to_string(Dyadic d) {
  return std::to_string(d.num) + "/2^" + std::to_string(d.exp2);
}

Dyadic parse_dyadic(const std::string& s) {
  std::size_t pos = 0;
  errno = 0;
  const char* begin = s.c_str();
  char* end = nullptr;
  const long long num = std::strtoll(begin, &end, 10);
  if (end == begin || errno != 0) throw config_error("parse_dyadic: bad numerator in '" + s + "'");
  pos = static_cast<std::size_t>(end - begin);
  if (pos == s.size()) return Dyadic{num, 0};
  if (s.compare(pos, 3, "/2^") != 0)
    throw config_error("parse_dyadic: expected 'num/2^k', got '" + s + "'");
  pos += 3;
  errno = 0;
  const char* ebegin = s.c_str() + pos;
  char* eend = nullptr;
  const long long k = std::strtoll(ebegin, &eend, 10);
  if (eend == ebegin || errno != 0 || static_cast<std::size_t>(eend - s.c_str()) != s.size() ||
      k < 0 || k > 62)
    throw config_error("parse_dyadic: bad exponent in '" + s + "'");
  return Dyadic{num, static_cast<int>(k)};
}

}  // namespace splyne
