#ifndef CONSTEL_GAUSSIAN_INT_HPP
#define CONSTEL_GAUSSIAN_INT_HPP

#include <cctype>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "constel/int128.hpp"

namespace constel {

struct GaussianInt {
  int128 re = 0;
  int128 im = 0;
};

inline bool operator==(const GaussianInt& a, const GaussianInt& b) {
  return a.re == b.re && a.im == b.im;
}
inline bool operator!=(const GaussianInt& a, const GaussianInt& b) { return !(a == b); }

inline GaussianInt operator+(const GaussianInt& a, const GaussianInt& b) {
  return {checked_add(a.re, b.re), checked_add(a.im, b.im)};
}
inline GaussianInt operator-(const GaussianInt& a, const GaussianInt& b) {
  return {checked_sub(a.re, b.re), checked_sub(a.im, b.im)};
}
inline GaussianInt operator-(const GaussianInt& a) {
  return {checked_neg(a.re), checked_neg(a.im)};
}
inline GaussianInt operator*(const GaussianInt& a, const GaussianInt& b) {
  return {checked_sub(checked_mul(a.re, b.re), checked_mul(a.im, b.im)),
          checked_add(checked_mul(a.re, b.im), checked_mul(a.im, b.re))};
}

inline GaussianInt conj(const GaussianInt& z) { return {z.re, checked_neg(z.im)}; }

inline int128 norm(const GaussianInt& z) {
  return checked_add(checked_mul(z.re, z.re), checked_mul(z.im, z.im));
}

inline bool is_zero(const GaussianInt& z) { return z.re == 0 && z.im == 0; }
inline bool is_unit(const GaussianInt& z) { return norm(z) == 1; }

inline GaussianInt times_i(const GaussianInt& z) { return {checked_neg(z.im), z.re}; }

// The unique associate with re > 0 and im >= 0 (first quadrant, positive real axis included).
inline GaussianInt canonical(const GaussianInt& z) {
  if (is_zero(z)) throw std::invalid_argument("canonical form of zero is undefined");
  GaussianInt w = z;
  for (int k = 0; k < 4; ++k) {
    if (w.re > 0 && w.im >= 0) return w;
    w = times_i(w);
  }
  throw std::logic_error("no canonical associate found");
}

inline bool is_canonical(const GaussianInt& z) { return z.re > 0 && z.im >= 0; }

// Exact divisibility: d | n iff conj(d)*n has both components divisible by norm(d).
inline bool divides(const GaussianInt& d, const GaussianInt& n) {
  if (is_zero(d)) throw std::invalid_argument("division by zero");
  int128 m = norm(d);
  GaussianInt t = conj(d) * n;
  return t.re % m == 0 && t.im % m == 0;
}

inline GaussianInt exact_div(const GaussianInt& n, const GaussianInt& d) {
  if (is_zero(d)) throw std::invalid_argument("division by zero");
  int128 m = norm(d);
  GaussianInt t = conj(d) * n;
  if (t.re % m != 0 || t.im % m != 0) throw std::invalid_argument("exact_div on non-divisor");
  return {t.re / m, t.im / m};
}

// Euclidean step: quotient components are nearest integers (ties toward zero),
// which forces norm(remainder) <= norm(d)/2.
inline std::pair<GaussianInt, GaussianInt> divmod(const GaussianInt& n, const GaussianInt& d) {
  if (is_zero(d)) throw std::invalid_argument("division by zero");
  int128 m = norm(d);
  GaussianInt t = conj(d) * n;
  GaussianInt q{round_nearest_ties_to_zero(t.re, m), round_nearest_ties_to_zero(t.im, m)};
  GaussianInt r = n - q * d;
  return {q, r};
}

inline GaussianInt gcd(GaussianInt a, GaussianInt b) {
  if (is_zero(a) && is_zero(b)) throw std::invalid_argument("gcd(0, 0) is undefined");
  while (!is_zero(b)) {
    GaussianInt r = divmod(a, b).second;
    a = b;
    b = r;
  }
  return canonical(a);
}

// Ordering used for table listings and factor lists: by norm, then by imaginary part,
// then by real part.
inline bool table_order_less(const GaussianInt& a, const GaussianInt& b) {
  int128 na = norm(a), nb = norm(b);
  if (na != nb) return na < nb;
  if (a.im != b.im) return a.im < b.im;
  return a.re < b.re;
}

// Plain lexicographic ordering on (re, im).
inline bool lex_less(const GaussianInt& a, const GaussianInt& b) {
  if (a.re != b.re) return a.re < b.re;
  return a.im < b.im;
}

inline std::string format(const GaussianInt& z) {
  if (z.im == 0) return to_string_128(z.re);
  std::string imag;
  if (z.im == 1) imag = "i";
  else if (z.im == -1) imag = "-i";
  else imag = to_string_128(z.im) + "i";
  if (z.re == 0) return imag;
  if (z.im > 0) return to_string_128(z.re) + "+" + imag;
  return to_string_128(z.re) + imag;
}

// Accepts "a", "bi", "i", "-i", "a+bi", "a-bi" with optional whitespace.
inline GaussianInt parse_gaussian(const std::string& text) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  struct Term {
    int128 value;
    bool imaginary;
  };
  auto read_term = [&]() -> Term {
    skip_ws();
    int sign = 1;
    while (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      if (text[pos] == '-') sign = -sign;
      ++pos;
      skip_ws();
    }
    bool have_digits = false;
    int128 value = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      value = checked_add(checked_mul(value, 10), text[pos] - '0');
      have_digits = true;
      ++pos;
    }
    skip_ws();
    bool imaginary = false;
    if (pos < text.size() && (text[pos] == 'i' || text[pos] == 'I')) {
      imaginary = true;
      ++pos;
      if (!have_digits) value = 1;
    } else if (!have_digits) {
      throw std::invalid_argument("cannot parse Gaussian integer: '" + text + "'");
    }
    return {sign > 0 ? value : checked_neg(value), imaginary};
  };
  GaussianInt z;
  bool seen_real = false, seen_imag = false;
  Term t = read_term();
  if (t.imaginary) {
    z.im = t.value;
    seen_imag = true;
  } else {
    z.re = t.value;
    seen_real = true;
  }
  skip_ws();
  if (pos < text.size()) {
    if (text[pos] != '+' && text[pos] != '-')
      throw std::invalid_argument("cannot parse Gaussian integer: '" + text + "'");
    Term u = read_term();
    if (u.imaginary) {
      if (seen_imag) throw std::invalid_argument("duplicate imaginary part: '" + text + "'");
      z.im = u.value;
    } else {
      if (seen_real) throw std::invalid_argument("duplicate real part: '" + text + "'");
      z.re = u.value;
    }
    skip_ws();
  }
  if (pos != text.size())
    throw std::invalid_argument("trailing characters in Gaussian integer: '" + text + "'");
  return z;
}

struct GaussianIntHash {
  std::size_t operator()(const GaussianInt& z) const {
    auto mix = [](std::size_t h, int128 v) {
      std::size_t lo = static_cast<std::size_t>(static_cast<uint128>(v));
      std::size_t hi = static_cast<std::size_t>(static_cast<uint128>(v) >> 64);
      h ^= lo + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h ^= hi + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      return h;
    };
    return mix(mix(0, z.re), z.im);
  }
};

}  // namespace constel

#endif
