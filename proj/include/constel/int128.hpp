#ifndef CONSTEL_INT128_HPP
#define CONSTEL_INT128_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace constel {

using int128 = __int128;
using uint128 = unsigned __int128;

// Component arithmetic is 128-bit; anything that would leave that range
// raises std::range_error instead of wrapping.
inline int128 checked_add(int128 a, int128 b) {
  int128 r;
  if (__builtin_add_overflow(a, b, &r)) throw std::range_error("integer overflow in addition");
  return r;
}

inline int128 checked_sub(int128 a, int128 b) {
  int128 r;
  if (__builtin_sub_overflow(a, b, &r)) throw std::range_error("integer overflow in subtraction");
  return r;
}

inline int128 checked_mul(int128 a, int128 b) {
  int128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::range_error("integer overflow in multiplication");
  return r;
}

inline int128 checked_neg(int128 a) { return checked_sub(0, a); }

inline int128 abs128(int128 a) { return a < 0 ? checked_neg(a) : a; }

inline int128 gcd128(int128 a, int128 b) {
  a = abs128(a);
  b = abs128(b);
  while (b != 0) {
    int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline std::string to_string_128(int128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  uint128 u = neg ? (uint128)0 - (uint128)v : (uint128)v;
  std::string s;
  while (u > 0) {
    s.push_back(char('0' + int(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  std::string r(s.rbegin(), s.rend());
  return r;
}

inline double to_double_128(int128 v) { return static_cast<double>(static_cast<long double>(v)); }

// Nearest integer to num/den with ties rounded toward zero; den must be positive.
inline int128 round_nearest_ties_to_zero(int128 num, int128 den) {
  int128 q = num / den;  // C++ division truncates toward zero
  int128 r = num - q * den;
  if (r > 0 && 2 * r > den) ++q;
  if (r < 0 && -2 * r > den) --q;
  return q;
}

inline int128 isqrt128(int128 n) {
  if (n < 0) throw std::invalid_argument("isqrt of negative value");
  if (n < 2) return n;
  int128 x = n, y = (x + 1) / 2;
  while (y < x) {
    x = y;
    y = (x + n / x) / 2;
  }
  while (x * x > n) --x;
  while ((x + 1) * (x + 1) <= n) ++x;
  return x;
}

}  // namespace constel

#endif
