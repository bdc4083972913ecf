#pragma once

// Shapes of prospective prime constellations: normalization (base point at
// zero, greedy augmentation until the pairwise lattice-spanning condition
// holds), point-set symmetrization, membership tests against the Gaussian
// primes, an exhaustive resumable scan over bases and scales, and coarse
// density reports over nested scan volumes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "constel/gaussian_int.hpp"
#include "constel/prime_table.hpp"

namespace constel {

struct Shape {
  std::vector<GaussianInt> points;
};

inline void require_distinct_points(const std::vector<GaussianInt>& pts) {
  std::unordered_set<GaussianInt, GaussianIntHash> seen;
  for (const GaussianInt& v : pts)
    if (!seen.insert(v).second) throw std::invalid_argument("shape points must be distinct");
}

// The pairwise spanning condition: for every ordered pair (i, j) of distinct
// indices, the difference vectors {v_k - v_j : k != i, j} generate the full
// integer lattice.  A set of integer vectors generates the lattice exactly
// when the gcd of all its 2x2 determinants is 1.
inline bool is_fully_spanning(const std::vector<GaussianInt>& pts) {
  const std::size_t k = pts.size();
  if (k <= 1) return true;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      std::vector<GaussianInt> w;
      for (std::size_t t = 0; t < k; ++t)
        if (t != i && t != j) w.push_back(pts[t] - pts[j]);
      int128 g = 0;
      for (std::size_t s = 0; s < w.size(); ++s)
        for (std::size_t t = s + 1; t < w.size(); ++t) {
          int128 det =
              checked_sub(checked_mul(w[s].re, w[t].im), checked_mul(w[s].im, w[t].re));
          g = gcd128(g, det);
        }
      if (g != 1) return false;
    }
  return true;
}

// First-quadrant augmentation candidates ordered by (norm, im): 1, i, 1+i,
// 2, 2i, 2+i, 1+2i, ...  The stream is fixed so augmented shapes are
// reproducible.
inline GaussianInt augmentation_candidate(int index) {
  std::vector<GaussianInt> pool;
  for (long long re = 0; re <= 8; ++re)
    for (long long im = 0; im <= 8; ++im)
      if (re != 0 || im != 0) pool.push_back({re, im});
  std::sort(pool.begin(), pool.end(), [](const GaussianInt& a, const GaussianInt& b) {
    int128 na = norm(a), nb = norm(b);
    if (na != nb) return na < nb;
    if (a.im != b.im) return a.im < b.im;
    return a.re < b.re;
  });
  if (index < 0 || index >= static_cast<int>(pool.size()))
    throw std::logic_error("augmentation stream exhausted");
  return pool[static_cast<std::size_t>(index)];
}

// Translates the first point to zero, then appends candidates from the fixed
// stream until the pairwise spanning condition holds.
inline Shape normalize(const Shape& s) {
  if (s.points.empty()) throw std::invalid_argument("shape must be nonempty");
  require_distinct_points(s.points);
  std::vector<GaussianInt> pts;
  for (const GaussianInt& v : s.points) pts.push_back(v - s.points[0]);
  int next = 0;
  while (!is_fully_spanning(pts)) {
    GaussianInt cand = augmentation_candidate(next++);
    if (std::find(pts.begin(), pts.end(), cand) == pts.end()) pts.push_back(cand);
  }
  return Shape{std::move(pts)};
}

// Union with the negated point set, preserving first-appearance order.
inline Shape symmetrize(const Shape& s) {
  std::vector<GaussianInt> pts = s.points;
  for (const GaussianInt& v : s.points) {
    GaussianInt m = -v;
    if (std::find(pts.begin(), pts.end(), m) == pts.end()) pts.push_back(m);
  }
  return Shape{std::move(pts)};
}

// Gaussian primality by norm classification: norm 2 (associate of 1+i), norm
// a rational prime congruent to 1 mod 4 (split), or an axis point whose
// rational prime is congruent to 3 mod 4 (inert).  The flag restricts to the
// split primes only.
inline bool is_gaussian_prime(const GaussianInt& z, const GaussPrimeTable& table,
                              bool unexceptional_only = false) {
  int128 n = norm(z);
  if (n <= 1) return false;
  if (n == 2) return !unexceptional_only;
  if (n % 4 == 1 && table.is_rational_prime(n)) return true;
  if (unexceptional_only) return false;
  int128 q = 0;
  if (z.re == 0)
    q = abs128(z.im);
  else if (z.im == 0)
    q = abs128(z.re);
  else
    return false;
  return q % 4 == 3 && table.is_rational_prime(q);
}

// Independent primality route: trial division by the table's canonical primes
// with norm up to the square root of the norm of z.  Requires the table to
// reach that far; otherwise a coverage error is raised.
inline bool verified_prime_by_division(const GaussianInt& z, const GaussPrimeTable& table) {
  int128 n = norm(z);
  if (n <= 1) return false;
  if (int128(table.norm_bound) * table.norm_bound < n) throw CoverageError(n);
  for (const PrimeEntry& e : table.entries) {
    if (int128(e.norm) * e.norm > n) break;
    if (divides(e.prime, z)) return false;
  }
  return true;
}

struct Constellation {
  GaussianInt a;
  long long r = 0;
  std::vector<GaussianInt> points;
};

inline bool is_constellation(const GaussianInt& a, long long r, const Shape& shape,
                             const GaussPrimeTable& table, bool unexceptional_only = false) {
  if (r == 0) throw std::invalid_argument("constellation scale must be nonzero");
  if (shape.points.empty()) return false;
  GaussianInt scale{r, 0};
  for (const GaussianInt& v : shape.points)
    if (!is_gaussian_prime(a + scale * v, table, unexceptional_only)) return false;
  return true;
}

struct SearchPlan {
  bool unexceptional_only = false;
  long long max_results = 0;              // 0: collect everything
  long long checkpoint_every = 10000000;  // candidates between checkpoint marks
  long long resume_index = 0;             // linear candidate index to start from
};

struct SearchResult {
  std::vector<Constellation> found;
  long long candidates_scanned = 0;
  long long resume_index = 0;  // next index to continue from; equals the total when finished
  bool finished = true;
  long long checkpoints = 0;
};

namespace detail {
// Plain odd-composite sieve used to decide rational primality inside the scan
// without going through the slower general-purpose routes per candidate.
inline std::vector<bool> rational_prime_flags(long long bound) {
  if (bound > 8000000000LL)
    throw std::length_error("scan norm bound exceeds the sieve budget");
  std::vector<bool> is_prime(static_cast<std::size_t>(bound) + 1, true);
  is_prime[0] = false;
  if (bound >= 1) is_prime[1] = false;
  for (long long i = 2; i * i <= bound; ++i)
    if (is_prime[static_cast<std::size_t>(i)])
      for (long long j = i * i; j <= bound; j += i) is_prime[static_cast<std::size_t>(j)] = false;
  return is_prime;
}
}  // namespace detail

// Exhaustive scan: scales r = 1..r_bound in increasing order, bases in
// lexicographic (re, im) order over the square |re|, |im| <= a_bound.  Every
// hit must pass the classification route and the independent trial-division
// route; a disagreement between the two is a logic error.  The linear
// candidate index makes interrupted scans resumable.
inline SearchResult search(const Shape& shape, long long a_bound, long long r_bound,
                           const GaussPrimeTable& table, const SearchPlan& plan = {}) {
  if (a_bound < 0) throw std::invalid_argument("base bound must be nonnegative");
  SearchResult out;
  if (r_bound <= 0 || shape.points.empty()) return out;
  require_distinct_points(shape.points);

  int128 max_norm_wide = 0;
  for (const GaussianInt& v : shape.points) {
    int128 mre = checked_add(a_bound, checked_mul(r_bound, abs128(v.re)));
    int128 mim = checked_add(a_bound, checked_mul(r_bound, abs128(v.im)));
    max_norm_wide =
        std::max(max_norm_wide, checked_add(checked_mul(mre, mre), checked_mul(mim, mim)));
  }
  if (int128(table.norm_bound) * table.norm_bound < max_norm_wide)
    throw CoverageError(max_norm_wide);
  if (max_norm_wide > 8000000000LL)
    throw std::length_error("scan norm bound exceeds the sieve budget");
  const long long max_norm = static_cast<long long>(max_norm_wide);
  std::vector<bool> sieve = detail::rational_prime_flags(max_norm);
  auto scan_prime = [&](long long re, long long im) {
    long long n = re * re + im * im;
    if (n <= 1) return false;
    if (n == 2) return !plan.unexceptional_only;
    if (n % 4 == 1 && sieve[static_cast<std::size_t>(n)]) return true;
    if (plan.unexceptional_only) return false;
    long long q = re == 0 ? std::llabs(im) : (im == 0 ? std::llabs(re) : 0);
    return q != 0 && q % 4 == 3 && sieve[static_cast<std::size_t>(q)];
  };
  std::vector<std::pair<long long, long long>> offs;
  for (const GaussianInt& v : shape.points)
    offs.emplace_back(static_cast<long long>(v.re), static_cast<long long>(v.im));

  const long long side = 2 * a_bound + 1;
  const long long per_r = side * side;
  const long long total = per_r * r_bound;
  long long idx = plan.resume_index;
  if (idx < 0) throw std::invalid_argument("resume index must be nonnegative");
  for (; idx < total; ++idx) {
    if (plan.max_results > 0 &&
        static_cast<long long>(out.found.size()) >= plan.max_results) {
      out.finished = false;
      break;
    }
    long long r = idx / per_r + 1;
    long long rem = idx % per_r;
    long long re = rem / side - a_bound;
    long long im = rem % side - a_bound;
    ++out.candidates_scanned;
    if (plan.checkpoint_every > 0 && out.candidates_scanned % plan.checkpoint_every == 0)
      ++out.checkpoints;
    bool hit = true;
    for (const auto& [vre, vim] : offs)
      if (!scan_prime(re + r * vre, im + r * vim)) {
        hit = false;
        break;
      }
    if (!hit) continue;
    GaussianInt a{re, im};
    if (!is_constellation(a, r, shape, table, plan.unexceptional_only))
      throw std::logic_error("scan and classification primality routes disagree");
    Constellation c;
    c.a = a;
    c.r = r;
    for (const GaussianInt& v : shape.points) {
      GaussianInt p = a + GaussianInt{r, 0} * v;
      if (!verified_prime_by_division(p, table))
        throw std::logic_error("trial-division verification rejected a reported prime");
      c.points.push_back(p);
    }
    out.found.push_back(std::move(c));
  }
  out.resume_index = idx;
  out.finished = idx >= total;
  return out;
}

inline SearchResult search(const Shape& shape, long long a_bound, long long r_bound,
                           const GaussPrimeTable& table, bool unexceptional_only) {
  SearchPlan plan;
  plan.unexceptional_only = unexceptional_only;
  return search(shape, a_bound, r_bound, table, plan);
}

// Count / (volume / log^k) across nested scan bounds, with the logarithm
// taken of the linear norm scale (half the log of the largest visited norm).
struct DensityRow {
  long long a_bound = 0;
  long long r_bound = 0;
  long long count = 0;
  double volume = 0.0;
  double log_scale = 0.0;
  double ratio = 0.0;
};

struct DensityReport {
  std::size_t shape_size = 0;
  std::vector<DensityRow> rows;
};

inline DensityReport density_report(const Shape& shape, long long a1, long long r1, long long a2,
                                    long long r2, const GaussPrimeTable& table,
                                    bool unexceptional_only = false) {
  DensityReport rep;
  rep.shape_size = shape.points.size();
  for (auto [ab, rb] : {std::pair<long long, long long>{a1, r1}, {a2, r2}}) {
    DensityRow row;
    row.a_bound = ab;
    row.r_bound = rb;
    row.volume = static_cast<double>(2 * ab + 1) * static_cast<double>(2 * ab + 1) *
                 static_cast<double>(rb);
    if (!shape.points.empty() && rb > 0) {
      SearchPlan plan;
      plan.unexceptional_only = unexceptional_only;
      SearchResult res = search(shape, ab, rb, table, plan);
      row.count = static_cast<long long>(res.found.size());
      int128 max_norm = 0;
      for (const GaussianInt& v : shape.points) {
        int128 mre = checked_add(ab, checked_mul(rb, abs128(v.re)));
        int128 mim = checked_add(ab, checked_mul(rb, abs128(v.im)));
        max_norm = std::max(max_norm, checked_add(checked_mul(mre, mre), checked_mul(mim, mim)));
      }
      row.log_scale = 0.5 * std::log(to_double_128(max_norm));
      double lk = std::pow(row.log_scale, static_cast<double>(rep.shape_size));
      row.ratio = static_cast<double>(row.count) * lk / row.volume;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace constel
