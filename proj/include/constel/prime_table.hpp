#ifndef CONSTEL_PRIME_TABLE_HPP
#define CONSTEL_PRIME_TABLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "constel/gaussian_int.hpp"
#include "constel/int128.hpp"

namespace constel {

// Raised when a computation needs prime information beyond what the table covers.
struct CoverageError : std::runtime_error {
  int128 missing_norm;
  explicit CoverageError(int128 missing)
      : std::runtime_error("prime table does not cover norm " + to_string_128(missing)),
        missing_norm(missing) {}
};

enum class PrimeKind { ramified, split_unexceptional, inert_exceptional };

inline const char* prime_kind_name(PrimeKind k) {
  switch (k) {
    case PrimeKind::ramified: return "ramified";
    case PrimeKind::split_unexceptional: return "split_unexceptional";
    case PrimeKind::inert_exceptional: return "inert_exceptional";
  }
  return "?";
}

struct PrimeEntry {
  GaussianInt prime;
  long long norm;
  PrimeKind kind;
};

inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((uint128)a * b % m);
}

inline std::uint64_t powmod_u64(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod_u64(r, a, m);
    a = mulmod_u64(a, a, m);
    e >>= 1;
  }
  return r;
}

// Deterministic Miller-Rabin, valid for all 64-bit inputs with this base set.
inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = powmod_u64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int i = 0; i < s - 1; ++i) {
      x = mulmod_u64(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

// Writes q = a^2 + b^2 with a > b >= 1 for a rational prime q = 1 (mod 4),
// returned as the canonical Gaussian integer a + bi.
inline GaussianInt two_squares(long long q) {
  if (q < 5 || q % 4 != 1 || !is_prime_u64(static_cast<std::uint64_t>(q)))
    throw std::invalid_argument("two_squares requires a rational prime = 1 (mod 4)");
  std::uint64_t uq = static_cast<std::uint64_t>(q);
  std::uint64_t r = 0;
  for (std::uint64_t a = 2;; ++a) {
    std::uint64_t c = powmod_u64(a, (uq - 1) / 4, uq);
    if (mulmod_u64(c, c, uq) == uq - 1) {
      r = c;
      break;
    }
    if (a > 10000) throw std::logic_error("no fourth-root witness found");
  }
  GaussianInt p = gcd(GaussianInt{q, 0}, GaussianInt{static_cast<long long>(r), 1});
  p = canonical(p);
  if (p.re < p.im) p = canonical(conj(p));
  if (norm(p) != q || !(p.re > p.im && p.im >= 1))
    throw std::logic_error("two-squares decomposition failed");
  return p;
}

struct GaussPrimeTable {
  long long norm_bound = 0;
  std::vector<PrimeEntry> entries;          // sorted by (norm, im)
  std::vector<long long> rational_primes;   // all rational primes <= norm_bound
  std::vector<bool> rational_is_prime;      // bitmap over [0, norm_bound]

  bool is_rational_prime(int128 n) const {
    if (n < 2) return false;
    if (n <= norm_bound) return rational_is_prime[static_cast<std::size_t>(n)];
    if (n <= int128(std::uint64_t(-1))) return is_prime_u64(static_cast<std::uint64_t>(n));
    throw CoverageError(n);
  }
};

// Builds the table of canonical Gaussian primes with norm at most norm_bound:
// 1+i (norm 2), the pair a+bi / b+ai for each rational prime q = 1 (mod 4)
// with q <= norm_bound, and q itself (norm q^2) for q = 3 (mod 4), q^2 <= norm_bound.
inline GaussPrimeTable build_table(long long norm_bound) {
  if (norm_bound < 2) throw std::invalid_argument("norm_bound must be at least 2");
  GaussPrimeTable t;
  t.norm_bound = norm_bound;
  t.rational_is_prime.assign(static_cast<std::size_t>(norm_bound) + 1, true);
  t.rational_is_prime[0] = false;
  t.rational_is_prime[1] = false;
  for (long long i = 2; i * i <= norm_bound; ++i)
    if (t.rational_is_prime[static_cast<std::size_t>(i)])
      for (long long j = i * i; j <= norm_bound; j += i)
        t.rational_is_prime[static_cast<std::size_t>(j)] = false;
  for (long long q = 2; q <= norm_bound; ++q)
    if (t.rational_is_prime[static_cast<std::size_t>(q)]) t.rational_primes.push_back(q);

  t.entries.push_back({GaussianInt{1, 1}, 2, PrimeKind::ramified});
  for (long long q : t.rational_primes) {
    if (q % 4 == 1) {
      GaussianInt p = two_squares(q);
      t.entries.push_back({p, q, PrimeKind::split_unexceptional});
      t.entries.push_back({canonical(conj(p)), q, PrimeKind::split_unexceptional});
    } else if (q % 4 == 3 && q <= norm_bound / q) {
      t.entries.push_back({GaussianInt{q, 0}, q * q, PrimeKind::inert_exceptional});
    }
  }
  std::sort(t.entries.begin(), t.entries.end(), [](const PrimeEntry& a, const PrimeEntry& b) {
    if (a.norm != b.norm) return a.norm < b.norm;
    return table_order_less(a.prime, b.prime);
  });
  return t;
}

struct Factorization {
  GaussianInt unit;
  std::vector<std::pair<GaussianInt, int>> factors;  // canonical primes, sorted by (norm, im)
};

// Factors n by factoring its norm over rational primes and lifting each one.
// A residual cofactor the table cannot certify raises CoverageError with that norm.
inline Factorization factor(const GaussianInt& n, const GaussPrimeTable& table) {
  if (is_zero(n)) throw std::invalid_argument("cannot factor zero");
  Factorization out;
  int128 m = norm(n);
  GaussianInt work = n;
  auto divide_out = [&](const GaussianInt& p) {
    int e = 0;
    while (divides(p, work)) {
      work = exact_div(work, p);
      ++e;
    }
    return e;
  };
  auto lift_rational_prime = [&](long long q, int e) {
    if (q == 2) {
      GaussianInt p{1, 1};
      int got = divide_out(p);
      if (got != e) throw std::logic_error("ramified lift mismatch");
      out.factors.push_back({p, e});
    } else if (q % 4 == 1) {
      GaussianInt p = two_squares(q);
      GaussianInt pb = canonical(conj(p));
      int e1 = divide_out(p);
      int e2 = divide_out(pb);
      if (e1 + e2 != e) throw std::logic_error("split lift mismatch");
      if (e1) out.factors.push_back({p, e1});
      if (e2) out.factors.push_back({pb, e2});
    } else {
      if (e % 2 != 0) throw std::logic_error("inert prime with odd norm multiplicity");
      GaussianInt p{q, 0};
      int got = divide_out(p);
      if (got != e / 2) throw std::logic_error("inert lift mismatch");
      out.factors.push_back({p, e / 2});
    }
  };

  for (long long q : table.rational_primes) {
    if (int128(q) * q > m) break;
    if (m % q == 0) {
      int e = 0;
      while (m % q == 0) {
        m /= q;
        ++e;
      }
      lift_rational_prime(q, e);
    }
  }
  if (m > 1) {
    if (m <= table.norm_bound) {
      // Norm residue below the sieve limit is prime (all smaller factors removed).
      lift_rational_prime(static_cast<long long>(m), 1);
    } else if (m <= int128(std::uint64_t(-1)) && is_prime_u64(static_cast<std::uint64_t>(m))) {
      std::uint64_t q = static_cast<std::uint64_t>(m);
      if (q % 4 == 3) throw std::logic_error("lone inert prime in a norm");
      lift_rational_prime(static_cast<long long>(q), 1);
    } else {
      int128 s = isqrt128(m);
      if (s * s == m && s % 4 == 3 && s <= int128(std::uint64_t(-1)) &&
          is_prime_u64(static_cast<std::uint64_t>(s))) {
        lift_rational_prime(static_cast<long long>(s), 2);
      } else {
        throw CoverageError(m);
      }
    }
  }
  if (!is_unit(work)) throw std::logic_error("non-unit left after removing all prime factors");
  out.unit = work;
  std::sort(out.factors.begin(), out.factors.end(),
            [](const auto& a, const auto& b) { return table_order_less(a.first, b.first); });
  return out;
}

inline int moebius(const GaussianInt& n, const GaussPrimeTable& table) {
  Factorization f = factor(n, table);
  for (const auto& [p, e] : f.factors)
    if (e >= 2) return 0;
  return f.factors.size() % 2 == 0 ? 1 : -1;
}

inline double log_norm(const GaussianInt& z) {
  return static_cast<double>(std::log(static_cast<long double>(norm(z))));
}

// log norm(p) when n is an associate of a prime power p^k, zero otherwise.
inline double mangoldt(const GaussianInt& n, const GaussPrimeTable& table) {
  Factorization f = factor(n, table);
  if (f.factors.size() != 1) return 0.0;
  return log_norm(f.factors[0].first);
}

// Classifies a Gaussian prime by its norm: 2 is ramified, a rational prime
// congruent to 1 mod 4 marks a split prime, and anything else must be the
// square of an inert rational prime.
inline PrimeKind classify_prime(const GaussianInt& p, const GaussPrimeTable& table) {
  int128 q = norm(p);
  if (q == 2) return PrimeKind::ramified;
  if (q % 4 == 1 && table.is_rational_prime(q)) return PrimeKind::split_unexceptional;
  return PrimeKind::inert_exceptional;
}

inline bool is_sq_unexceptional(const GaussianInt& n, const GaussPrimeTable& table) {
  Factorization f = factor(n, table);
  for (const auto& [p, e] : f.factors) {
    int128 q = norm(p);
    if (e != 1 || q % 4 != 1 || !table.is_rational_prime(q)) return false;
  }
  return true;
}

// Number of divisors including unit multiples: 4 * prod(e_i + 1).
inline long long divisor_count(const GaussianInt& n, const GaussPrimeTable& table) {
  Factorization f = factor(n, table);
  long long d = 4;
  for (const auto& [p, e] : f.factors) d *= e + 1;
  return d;
}

// Enumerates one divisor per associate class along with its squarefree sign
// (zero when not squarefree), distinct-prime count, and its own factor exponents.
// fn(divisor, mu, distinct_prime_count, is_prime_power_log) is called per divisor,
// where is_prime_power_log = log norm(p) when the divisor is p^k (else 0).
inline void for_each_divisor(const Factorization& f,
                             const std::function<void(const GaussianInt&, int, int, double)>& fn) {
  std::size_t k = f.factors.size();
  std::vector<int> exps(k, 0);
  std::function<void(std::size_t, GaussianInt)> rec = [&](std::size_t idx, GaussianInt acc) {
    if (idx == k) {
      int distinct = 0;
      bool squarefree = true;
      int nonzero_idx = -1;
      for (std::size_t i = 0; i < k; ++i) {
        if (exps[i] > 0) {
          ++distinct;
          nonzero_idx = static_cast<int>(i);
          if (exps[i] > 1) squarefree = false;
        }
      }
      int mu = squarefree ? (distinct % 2 == 0 ? 1 : -1) : 0;
      double plog = distinct == 1 ? log_norm(f.factors[static_cast<std::size_t>(nonzero_idx)].first) : 0.0;
      fn(acc, mu, distinct, plog);
      return;
    }
    GaussianInt cur = acc;
    for (int e = 0; e <= f.factors[idx].second; ++e) {
      exps[idx] = e;
      rec(idx + 1, cur);
      if (e < f.factors[idx].second) cur = cur * f.factors[idx].first;
    }
    exps[idx] = 0;
  };
  rec(0, GaussianInt{1, 0});
}

}  // namespace constel

#endif
