#ifndef CONSTEL_LOCAL_FACTORS_HPP
#define CONSTEL_LOCAL_FACTORS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "constel/bump.hpp"
#include "constel/gaussian_int.hpp"
#include "constel/prime_table.hpp"
#include "constel/weight.hpp"

namespace constel {

// ---------------------------------------------------------------------------
// Exact rational arithmetic on 128-bit integers.
// ---------------------------------------------------------------------------

struct Rational {
  int128 num = 0;
  int128 den = 1;

  static Rational of(int128 n, int128 d) {
    if (d == 0) throw std::invalid_argument("rational with zero denominator");
    if (d < 0) {
      n = checked_neg(n);
      d = checked_neg(d);
    }
    int128 g = gcd128(abs128(n), d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    Rational r;
    r.num = n;
    r.den = d;
    return r;
  }

  double to_double() const { return to_double_128(num) / to_double_128(den); }

  std::string to_string() const {
    if (den == 1) return to_string_128(num);
    return to_string_128(num) + "/" + to_string_128(den);
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return checked_mul(a.num, b.den) < checked_mul(b.num, a.den);
  }
  friend bool operator<=(const Rational& a, const Rational& b) {
    return checked_mul(a.num, b.den) <= checked_mul(b.num, a.den);
  }
  friend Rational operator+(const Rational& a, const Rational& b) {
    return of(checked_add(checked_mul(a.num, b.den), checked_mul(b.num, a.den)),
              checked_mul(a.den, b.den));
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    // Cross-reduce before multiplying to keep intermediates small.
    int128 g1 = gcd128(abs128(a.num), b.den);
    int128 g2 = gcd128(abs128(b.num), a.den);
    return of(checked_mul(a.num / g1, b.num / g2), checked_mul(a.den / g2, b.den / g1));
  }
};

// Signals the diagonal / anomalous configuration for which the multiplicative
// bounds do not apply; callers fall back to the crude divisor-count bound.
struct AnomalousCase : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Families of Gaussian linear forms in rational unknowns.
// ---------------------------------------------------------------------------

struct LinearFormFamily {
  int T = 1;                                   // number of unknowns
  std::vector<std::vector<GaussianInt>> forms;  // one coefficient tuple per condition
  std::vector<GaussianInt> shifts;              // one additive shift per condition
};

inline void check_family_shape(const LinearFormFamily& family) {
  if (family.T < 1) throw std::invalid_argument("family needs at least one unknown");
  if (family.forms.size() != family.shifts.size())
    throw std::invalid_argument("forms and shifts must pair up");
  for (const auto& f : family.forms)
    if (static_cast<int>(f.size()) != family.T)
      throw std::invalid_argument("form arity does not match unknown count");
}

inline bool form_is_zero(const std::vector<GaussianInt>& f) {
  for (const auto& c : f)
    if (!is_zero(c)) return false;
  return true;
}

// a = q*b for some Gaussian rational q, detected through vanishing 2x2 minors.
inline bool proportional(const std::vector<GaussianInt>& a, const std::vector<GaussianInt>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("tuple length mismatch");
  if (form_is_zero(a)) return true;
  if (form_is_zero(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      if (!is_zero(a[i] * b[j] - a[j] * b[i])) return false;
  return true;
}

inline std::vector<GaussianInt> conj_form(const std::vector<GaussianInt>& f) {
  std::vector<GaussianInt> out;
  out.reserve(f.size());
  for (const auto& c : f) out.push_back(conj(c));
  return out;
}

// Two tuples are incommensurate when both are nonzero and neither the tuple
// nor its conjugate is a Gaussian-rational multiple of the other.
inline bool incommensurate(const std::vector<GaussianInt>& a, const std::vector<GaussianInt>& b) {
  if (form_is_zero(a) || form_is_zero(b)) return false;
  return !proportional(a, b) && !proportional(a, conj_form(b));
}

inline bool family_incommensurate(const LinearFormFamily& family) {
  check_family_shape(family);
  for (const auto& f : family.forms)
    if (form_is_zero(f)) return false;
  for (std::size_t s = 0; s < family.forms.size(); ++s)
    for (std::size_t t = s + 1; t < family.forms.size(); ++t)
      if (!incommensurate(family.forms[s], family.forms[t])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Local densities.
// ---------------------------------------------------------------------------

// Smallest positive rational integer divisible by q in the Gaussian integers.
inline long long rational_period(const GaussianInt& q, const GaussPrimeTable& table) {
  if (is_zero(q)) throw std::invalid_argument("zero modulus has no period");
  if (is_unit(q)) return 1;
  Factorization f = factor(q, table);
  int128 period = 1;
  for (const auto& [p, e] : f.factors) {
    int128 local = 1;
    switch (classify_prime(p, table)) {
      case PrimeKind::ramified:
        local = int128(1) << ((e + 1) / 2);
        break;
      case PrimeKind::split_unexceptional: {
        for (int k = 0; k < e; ++k) local = checked_mul(local, norm(p));
        break;
      }
      case PrimeKind::inert_exceptional: {
        int128 q3 = isqrt128(norm(p));
        for (int k = 0; k < e; ++k) local = checked_mul(local, q3);
        break;
      }
    }
    int128 g = gcd128(period, local);
    period = checked_mul(period / g, local);
  }
  if (period > int128(1000000000000LL)) throw std::length_error("modulus period too large");
  return static_cast<long long>(period);
}

namespace detail {
inline long long guarded_power(long long base, int exp, long long limit) {
  int128 acc = 1;
  for (int k = 0; k < exp; ++k) {
    acc = checked_mul(acc, int128(base));
    if (acc > int128(limit)) throw std::length_error("instance exceeds enumeration budget");
  }
  return static_cast<long long>(acc);
}
}  // namespace detail

// Exact density of rational tuples x in (Z/DZ)^T satisfying every condition
// q_s | W * (L_s . x) + a_s, where D is the lcm of the moduli periods.
inline Rational omega_bruteforce(const std::vector<GaussianInt>& moduli,
                                 const LinearFormFamily& family, long long W,
                                 const GaussPrimeTable& table,
                                 long long budget = 100000000LL) {
  check_family_shape(family);
  if (moduli.size() != family.forms.size())
    throw std::invalid_argument("one modulus per condition required");
  long long D = 1;
  for (const auto& q : moduli) {
    long long p = rational_period(q, table);
    long long g = static_cast<long long>(gcd128(int128(D), int128(p)));
    D = static_cast<long long>(checked_mul(int128(D / g), int128(p)));
  }
  long long total = detail::guarded_power(D, family.T, budget);
  std::vector<long long> x(static_cast<std::size_t>(family.T), 0);
  long long hits = 0;
  for (long long point = 0; point < total; ++point) {
    bool ok = true;
    for (std::size_t s = 0; s < moduli.size() && ok; ++s) {
      if (is_unit(moduli[s])) continue;
      GaussianInt z = family.shifts[s];
      for (int t = 0; t < family.T; ++t) {
        const GaussianInt& c = family.forms[s][static_cast<std::size_t>(t)];
        int128 xv = int128(x[static_cast<std::size_t>(t)]) * W;
        z = z + GaussianInt{checked_mul(c.re, xv), checked_mul(c.im, xv)};
      }
      ok = divides(moduli[s], z);
    }
    if (ok) ++hits;
    for (int t = 0; t < family.T; ++t) {
      if (++x[static_cast<std::size_t>(t)] < D) break;
      x[static_cast<std::size_t>(t)] = 0;
    }
  }
  return Rational::of(hits, total);
}

// Same density, but factored across prime norms: split each modulus into its
// per-norm part and multiply the block densities.  Valid because distinct
// rational primes give independent residue systems.
inline Rational omega_crt(const std::vector<GaussianInt>& moduli, const LinearFormFamily& family,
                          long long W, const GaussPrimeTable& table,
                          long long budget = 100000000LL) {
  check_family_shape(family);
  if (moduli.size() != family.forms.size())
    throw std::invalid_argument("one modulus per condition required");
  std::vector<Factorization> facs;
  std::set<long long> norms;
  for (const auto& q : moduli) {
    Factorization f = factor(q, table);
    for (const auto& [p, e] : f.factors) {
      if (e != 1 || classify_prime(p, table) != PrimeKind::split_unexceptional)
        throw std::invalid_argument("modulus must be a squarefree unexceptional product");
      long long n = static_cast<long long>(norm(p));
      if (W % n == 0) throw std::invalid_argument("modulus shares a prime norm with W");
      norms.insert(n);
    }
    facs.push_back(std::move(f));
  }
  Rational result = Rational::of(1, 1);
  for (long long n : norms) {
    std::vector<GaussianInt> block;
    for (const auto& f : facs) {
      GaussianInt part{1, 0};
      for (const auto& [p, e] : f.factors)
        if (static_cast<long long>(norm(p)) == n)
          for (int k = 0; k < e; ++k) part = part * p;
      block.push_back(part);
    }
    result = result * omega_bruteforce(block, family, W, table, budget);
  }
  return result;
}

// Lemma-style classification of the density for divisor data concentrated at
// one split norm n: exactly 1 with no prime, exactly 1/n with one prime, and
// an inspected O(1/n^2) value otherwise.  Hypothesis failures (forms that
// collapse modulo a prime above n) are reported, not thrown.
struct LocalPrediction {
  enum class Kind { unit_case, single_prime, higher_order, degenerate };
  Kind kind = Kind::unit_case;
  Rational value = Rational::of(1, 1);
  double bound_witness = 0.0;  // value * n^2 for the higher-order branch
  std::string note;
};

namespace detail {
inline bool form_zero_mod(const std::vector<GaussianInt>& f, const GaussianInt& p) {
  for (const auto& c : f)
    if (!divides(p, c)) return false;
  return true;
}

inline bool minors_vanish_mod(const std::vector<GaussianInt>& a, const std::vector<GaussianInt>& b,
                              const GaussianInt& p) {
  if (a.size() < 2) return true;  // no minors exist: nothing separates the forms
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      if (!divides(p, a[i] * b[j] - a[j] * b[i])) return false;
  return true;
}
}  // namespace detail

inline LocalPrediction local_prediction(long long n, const std::vector<GaussianInt>& divisors,
                                        const LinearFormFamily& family, long long W,
                                        const GaussPrimeTable& table,
                                        long long budget = 100000000LL) {
  check_family_shape(family);
  if (divisors.size() != family.forms.size())
    throw std::invalid_argument("one divisor per condition required");
  if (n < 5 || n % 4 != 1 || !table.is_rational_prime(n))
    throw std::invalid_argument("norm must be a split rational prime");
  int prime_count = 0;
  std::vector<std::vector<GaussianInt>> primes_at(divisors.size());
  for (std::size_t s = 0; s < divisors.size(); ++s) {
    Factorization f = factor(divisors[s], table);
    for (const auto& [p, e] : f.factors) {
      if (e != 1 || static_cast<long long>(norm(p)) != n)
        throw std::invalid_argument("divisor must be squarefree with all factors at norm n");
      primes_at[s].push_back(p);
      ++prime_count;
    }
  }
  LocalPrediction out;
  std::string why;
  bool degenerate = false;
  if (W % n == 0) {
    degenerate = true;
    why = "W vanishes modulo the prime norm";
  }
  for (std::size_t s = 0; s < divisors.size() && !degenerate; ++s)
    for (const auto& p : primes_at[s])
      if (detail::form_zero_mod(family.forms[s], p)) {
        degenerate = true;
        why = "a form collapses modulo a prime above n";
        break;
      }
  for (std::size_t s = 0; s < divisors.size() && !degenerate; ++s)
    for (std::size_t t = s + 1; t < divisors.size() && !degenerate; ++t) {
      if (primes_at[s].empty() || primes_at[t].empty()) continue;
      for (const auto& p : primes_at[s]) {
        bool plain = detail::minors_vanish_mod(family.forms[s], family.forms[t], p);
        bool conjd = detail::minors_vanish_mod(family.forms[s], conj_form(family.forms[t]), p);
        if (plain || conjd) {
          degenerate = true;
          why = "two conditioned forms are proportional modulo a prime above n";
          break;
        }
      }
    }
  if (prime_count == 0) {
    out.kind = LocalPrediction::Kind::unit_case;
    out.value = Rational::of(1, 1);
    return out;
  }
  if (degenerate) {
    out.kind = LocalPrediction::Kind::degenerate;
    out.value = omega_bruteforce(divisors, family, W, table, budget);
    out.note = why;
    out.bound_witness = out.value.to_double() * static_cast<double>(n) * static_cast<double>(n);
    return out;
  }
  if (prime_count == 1) {
    out.kind = LocalPrediction::Kind::single_prime;
    out.value = Rational::of(1, n);
    return out;
  }
  out.kind = LocalPrediction::Kind::higher_order;
  out.value = omega_bruteforce(divisors, family, W, table, budget);
  out.bound_witness = out.value.to_double() * static_cast<double>(n) * static_cast<double>(n);
  return out;
}

// ---------------------------------------------------------------------------
// Truncated zeta data.
// ---------------------------------------------------------------------------

struct TruncatedZeta {
  std::complex<double> value{1.0, 0.0};
  double tail_bound = 0.0;
};

// Euler product over first-quadrant unexceptional primes with w <= N(p) <= cutoff
// (conjugate partners contribute separate factors).  The tail bound dominates
// the effect of raising the cutoff.
inline TruncatedZeta truncated_zeta(std::complex<double> s, long long w, long long cutoff,
                                    const GaussPrimeTable& table) {
  if (!(s.real() > 1.0)) throw std::domain_error("need Re s > 1");
  TruncatedZeta out;
  if (cutoff < w) return out;  // empty product
  if (cutoff > table.norm_bound) throw CoverageError(cutoff);
  std::complex<double> prod{1.0, 0.0};
  for (const auto& entry : table.entries) {
    if (entry.norm > cutoff) break;
    if (entry.norm < w) continue;
    if (entry.kind != PrimeKind::split_unexceptional) continue;
    std::complex<double> euler =
        1.0 / (1.0 - std::exp(-s * std::log(static_cast<double>(entry.norm))));
    prod *= euler;
  }
  out.value = prod;
  double sigma = s.real();
  out.tail_bound = 2.0 * std::pow(static_cast<double>(cutoff), 1.0 - sigma) / (sigma - 1.0);
  return out;
}

struct GaussZetaRemainder {
  double zeta_value = 0.0;
  double remainder = 0.0;
  double reported_bound = 5.0;
};

// Full-lattice zeta value at real sigma minus its polar main term pi/(sigma-1).
// The lattice is summed to the norm cutoff with an integral tail correction.
inline GaussZetaRemainder zeta_gauss_remainder(double sigma, long long norm_cutoff = 10000000LL) {
  if (!(sigma > 1.0) || sigma > 1.5) throw std::domain_error("sigma must lie in (1, 1.5]");
  long long A = static_cast<long long>(std::floor(std::sqrt(static_cast<double>(norm_cutoff))));
  double sum = 0.0;
  for (long long a = 1; a <= A; ++a) {
    long long rem = norm_cutoff - a * a;
    long long B = static_cast<long long>(std::floor(std::sqrt(static_cast<double>(rem))));
    for (long long b = 0; b <= B; ++b) {
      long long nrm = a * a + b * b;
      if (nrm > norm_cutoff) continue;
      sum += std::pow(static_cast<double>(nrm), -sigma);
    }
  }
  double tail = 3.14159265358979323846 * std::pow(static_cast<double>(norm_cutoff), 1.0 - sigma) /
                (sigma - 1.0);
  GaussZetaRemainder out;
  out.zeta_value = 4.0 * sum + tail;
  out.remainder = out.zeta_value - 3.14159265358979323846 / (sigma - 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// The bump-function constant, direct and Fourier-side.
// ---------------------------------------------------------------------------

inline double c_phi_prime(const BumpFunction& phi, long long resolution = 1 << 20) {
  double value = (64.0 / 3.14159265358979323846) * derivative_energy(phi, resolution);
  if (!(value > 0.0) || !std::isfinite(value))
    throw std::runtime_error("quadrature for the derivative energy did not converge");
  return value;
}

namespace detail {
// (e^s - 1 - s) / s^2, the building block of the exponentially weighted
// transform of the triangle bump.
inline std::complex<double> expm1_quad(std::complex<double> s) {
  if (std::abs(s) < 1e-8) return 0.5 + s / 6.0;
  return (std::exp(s) - 1.0 - s) / (s * s);
}
}  // namespace detail

// psi(t) = (1/2pi) * integral of phi(x) e^{(1+it)x} over the support.
inline std::complex<double> exp_weighted_transform(const BumpFunction& phi, double t) {
  const double two_pi = 2.0 * 3.14159265358979323846;
  std::complex<double> s{1.0, t};
  if (phi.kind == BumpFunction::Kind::triangle)
    return (detail::expm1_quad(s) + detail::expm1_quad(-s)) / two_pi;
  // Composite Simpson on [-1, 1]; the integrand is smooth between nodes and
  // the slight kink error is far below the cross-check tolerance.
  const int n = 4096;  // even
  double h = 2.0 / n;
  std::complex<double> acc{0.0, 0.0};
  for (int k = 0; k <= n; ++k) {
    double x = -1.0 + k * h;
    double wgt = (k == 0 || k == n) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    acc += wgt * phi.eval(x) * std::exp(s * x);
  }
  return acc * (h / 3.0) / two_pi;
}

struct FourierCheck {
  double fourier_value = 0.0;
  double direct_value = 0.0;
  double relative_gap = 0.0;
};

namespace detail {
// Frequency-side double integral at one truncation T, via the anti-diagonal
// convolution of the weighted transform samples.
inline double fourier_energy_once(const BumpFunction& phi, double T, double h) {
  int n = static_cast<int>(std::llround(2.0 * T / h));
  std::vector<std::complex<double>> u(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    double t = -T + (j + 0.5) * h;
    u[static_cast<std::size_t>(j)] =
        exp_weighted_transform(phi, t) * std::complex<double>(1.0, t);
  }
  std::complex<double> total{0.0, 0.0};
  for (int d = 0; d <= 2 * (n - 1); ++d) {
    std::complex<double> conv{0.0, 0.0};
    int jlo = std::max(0, d - (n - 1));
    int jhi = std::min(n - 1, d);
    for (int j = jlo; j <= jhi; ++j)
      conv += u[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(d - j)];
    double ts = -2.0 * T + (d + 1) * h;  // t + t' along this anti-diagonal
    total += conv / std::complex<double>(2.0, ts);
  }
  return (total * h * h).real();
}
}  // namespace detail

// Cross-checks the constant by computing the same energy on the frequency
// side, with a two-point truncation extrapolation to kill the 1/T tail.
inline FourierCheck c_phi_prime_fourier_check(const BumpFunction& phi, double T = 200.0,
                                              double h = 0.05) {
  double once = detail::fourier_energy_once(phi, T, h);
  double twice = detail::fourier_energy_once(phi, 2.0 * T, h);
  double energy = 2.0 * twice - once;
  FourierCheck out;
  out.fourier_value = (64.0 / 3.14159265358979323846) * energy;
  out.direct_value = c_phi_prime(phi);
  out.relative_gap = std::fabs(out.fourier_value - out.direct_value) / out.direct_value;
  return out;
}

// ---------------------------------------------------------------------------
// Correlation main terms and empirical averages.
// ---------------------------------------------------------------------------

// Predicted size of the |S|-fold correlation average of the squared truncated
// divisor sum along W-tricked forms.  The base constant is c_phi_prime / 16:
// the divisor sum is normalized over first-quadrant primes only, which scales
// its square by 1/16 against the all-associates convention behind c_phi_prime.
inline double gy_main_term(int s_size, const WModulus& wm, long long R, const BumpFunction& phi) {
  if (s_size < 0) throw std::invalid_argument("negative family size");
  double W = static_cast<double>(wm.W);
  double base = (c_phi_prime(phi) / 16.0) * (W * W / static_cast<double>(wm.phi_W)) *
                std::log(static_cast<double>(R) * static_cast<double>(R));
  return std::pow(base, s_size);
}

struct CoordBox {
  long long re_lo = 0, re_hi = 1, im_lo = 0, im_hi = 1;
};

struct GyPlan {
  long long exhaustive_limit = 2000000;
  long long samples = 400000;
  std::uint64_t seed = 1;
  long long min_side = 4;
};

struct EmpiricalGy {
  double value = 1.0;
  double std_error = 0.0;
  bool sampled = false;
  bool floor_warning = false;
  long long points = 0;
};

// Average over a coordinate box of the product over conditions of the squared
// truncated divisor sum at W (L_s . x) + a_s.
inline EmpiricalGy empirical_gy(const LinearFormFamily& family, const std::vector<CoordBox>& box,
                                long long R, long long W, const BumpFunction& phi,
                                const GaussPrimeTable& table, const GyPlan& plan = GyPlan{}) {
  check_family_shape(family);
  if (static_cast<int>(box.size()) != family.T)
    throw std::invalid_argument("one coordinate box per unknown required");
  GaussianInt Wg{W, 0};
  for (const auto& a : family.shifts)
    if (W > 1 && !is_unit(gcd(a, Wg)))
      throw std::invalid_argument("shift shares a factor with W");
  EmpiricalGy out;
  double log_floor = 10.0 * static_cast<double>(family.forms.size()) *
                     std::log(static_cast<double>(R));
  double total_points = 1.0;
  for (const auto& cb : box) {
    long long rs = cb.re_hi - cb.re_lo;
    long long is = cb.im_hi - cb.im_lo;
    if (rs <= 0 || is <= 0) throw std::invalid_argument("empty coordinate box");
    if (rs < plan.min_side || is < plan.min_side)
      throw std::invalid_argument("coordinate box below the configured side floor");
    if (std::log(static_cast<double>(rs)) < log_floor ||
        std::log(static_cast<double>(is)) < log_floor)
      out.floor_warning = true;
    total_points *= static_cast<double>(rs) * static_cast<double>(is);
  }
  auto eval = [&](const std::vector<GaussianInt>& x) {
    double prod = 1.0;
    for (std::size_t s = 0; s < family.forms.size(); ++s) {
      GaussianInt z = family.shifts[s];
      for (int t = 0; t < family.T; ++t) {
        const GaussianInt& c = family.forms[s][static_cast<std::size_t>(t)];
        GaussianInt scaled{checked_mul(c.re, int128(W)), checked_mul(c.im, int128(W))};
        z = z + scaled * x[static_cast<std::size_t>(t)];
      }
      double lam = truncated_mangoldt(z, R, phi, table);
      prod *= lam * lam;
    }
    return prod;
  };
  if (total_points <= static_cast<double>(plan.exhaustive_limit)) {
    std::vector<GaussianInt> x(static_cast<std::size_t>(family.T));
    std::vector<long long> idx(static_cast<std::size_t>(2 * family.T), 0);
    long long total = static_cast<long long>(total_points);
    double sum = 0.0;
    for (long long k = 0; k < total; ++k) {
      for (int t = 0; t < family.T; ++t) {
        const CoordBox& cb = box[static_cast<std::size_t>(t)];
        x[static_cast<std::size_t>(t)] =
            GaussianInt{cb.re_lo + idx[static_cast<std::size_t>(2 * t)],
                        cb.im_lo + idx[static_cast<std::size_t>(2 * t + 1)]};
      }
      sum += eval(x);
      for (int pos = 0; pos < 2 * family.T; ++pos) {
        const CoordBox& cb = box[static_cast<std::size_t>(pos / 2)];
        long long side = (pos % 2 == 0) ? cb.re_hi - cb.re_lo : cb.im_hi - cb.im_lo;
        if (++idx[static_cast<std::size_t>(pos)] < side) break;
        idx[static_cast<std::size_t>(pos)] = 0;
      }
    }
    out.value = sum / static_cast<double>(total);
    out.points = total;
    return out;
  }
  out.sampled = true;
  std::mt19937_64 rng(plan.seed);
  std::vector<GaussianInt> x(static_cast<std::size_t>(family.T));
  double sum = 0.0, sumsq = 0.0;
  for (long long k = 0; k < plan.samples; ++k) {
    for (int t = 0; t < family.T; ++t) {
      const CoordBox& cb = box[static_cast<std::size_t>(t)];
      std::uniform_int_distribution<long long> dre(cb.re_lo, cb.re_hi - 1);
      std::uniform_int_distribution<long long> dim(cb.im_lo, cb.im_hi - 1);
      long long re = dre(rng);
      long long im = dim(rng);
      x[static_cast<std::size_t>(t)] = GaussianInt{re, im};
    }
    double v = eval(x);
    sum += v;
    sumsq += v * v;
  }
  double nS = static_cast<double>(plan.samples);
  out.value = sum / nS;
  double var = std::max(0.0, (sumsq - sum * sum / nS) / (nS - 1.0));
  out.std_error = std::sqrt(var / nS);
  out.points = plan.samples;
  return out;
}

// ---------------------------------------------------------------------------
// The separation quantity and the correlation tau bounds.
// ---------------------------------------------------------------------------

struct DeltaQuantity {
  int128 value = 1;
  bool zero() const { return value == 0; }
};

// Product of the pairwise separation norms of the offsets with the norms of
// the twisted diagonal terms; zero flags a configuration the multiplicative
// bounds cannot see.
inline DeltaQuantity delta(const std::vector<GaussianInt>& h, const GaussianInt& v,
                           const GaussianInt& b, long long W) {
  DeltaQuantity out;
  int128 acc = 1;
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t j = i + 1; j < h.size(); ++j) acc = checked_mul(acc, norm(h[i] - h[j]));
  GaussianInt cv = conj(v);
  GaussianInt twist = conj(b) * v - b * cv;
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t j = i; j < h.size(); ++j) {
      GaussianInt core = h[i] * cv - conj(h[j]) * v;
      GaussianInt z = GaussianInt{checked_mul(core.re, int128(W)), checked_mul(core.im, int128(W))} + twist;
      acc = checked_mul(acc, norm(z));
    }
  out.value = acc;
  return out;
}

namespace detail {
// Distinct rational prime divisors of a positive 128-bit integer, via the
// table primes with certified handling of any residual.
inline std::vector<long long> distinct_prime_divisors(int128 value, const GaussPrimeTable& table) {
  if (value <= 0) throw std::invalid_argument("need a positive integer to factor");
  std::vector<long long> out;
  int128 rest = value;
  for (long long p : table.rational_primes) {
    if (int128(p) * p > rest) break;
    if (rest % p == 0) {
      out.push_back(p);
      while (rest % p == 0) rest /= p;
    }
  }
  if (rest > 1) {
    if (rest <= int128(table.norm_bound) ||
        (rest <= int128(0xFFFFFFFFFFFFFFFFULL) && is_prime_u64(static_cast<std::uint64_t>(rest)))) {
      out.push_back(static_cast<long long>(rest));
    } else {
      int128 s = isqrt128(rest);
      if (s * s == rest && s <= int128(0xFFFFFFFFFFFFFFFFULL) &&
          is_prime_u64(static_cast<std::uint64_t>(s)))
        out.push_back(static_cast<long long>(s));
      else
        throw CoverageError(rest);
    }
  }
  return out;
}
}  // namespace detail

// Multiplicative penalty over the distinct unexceptional prime norms, away
// from W, that divide the norm of the argument: prod (1 + kappa n^{-1/2})^{m^2}.
// kind 1 reads the argument directly; kinds 2 and 3 twist it by the residue
// data first.  A vanishing argument is the anomalous case.
inline double tau_bound(const GaussianInt& x, int kind, int m, const GaussianInt& v,
                        const GaussianInt& b, long long W, const GaussPrimeTable& table,
                        double kappa = 1.0) {
  if (kind < 1 || kind > 3) throw std::invalid_argument("kind must be 1, 2, or 3");
  if (m < 1) throw std::invalid_argument("need a positive exponent parameter");
  GaussianInt arg = x;
  if (kind != 1) {
    GaussianInt scaled{checked_mul(x.re, int128(W)), checked_mul(x.im, int128(W))};
    arg = scaled - b * conj(v) + conj(b) * v;
  }
  if (is_zero(arg)) throw AnomalousCase("vanishing argument: use the crude divisor bound");
  std::vector<long long> primes = detail::distinct_prime_divisors(norm(arg), table);
  double out = 1.0;
  double expo = static_cast<double>(m) * static_cast<double>(m);
  for (long long q : primes) {
    if (q % 4 != 1) continue;      // only unexceptional norms contribute
    if (W % q == 0) continue;      // primes inside W are excluded
    out *= std::pow(1.0 + kappa / std::sqrt(static_cast<double>(q)), expo);
  }
  return out;
}

struct CorrelationPlan {
  long long interval_start = 0;
  long long interval_length = 2000;
  double kappa = 1.0;
  double margin = 5.0;
};

struct CorrelationReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 5.0;
  bool pass = false;
  bool crude_path = false;
  int128 delta_value = 0;
  long long interval_start = 0;
  long long interval_length = 0;
};

// Measures the m-fold squared-divisor-sum correlation along the line h_j + n v
// (n rational, over an interval) against the multiplicative bound
// (N(W) log N(R)/phi_W)^m * prod_{q | Delta} (1 + kappa q^{-1/2})^{m^2}.
inline CorrelationReport correlation_check(const GaussianInt& v, const std::vector<GaussianInt>& h,
                                           const WeightConfig& cfg, const GaussPrimeTable& table,
                                           const CorrelationPlan& plan = CorrelationPlan{}) {
  if (h.empty()) throw std::invalid_argument("need at least one offset");
  if (plan.interval_length < 1) throw std::invalid_argument("empty interval");
  CorrelationReport report;
  report.margin = plan.margin;
  report.interval_start = plan.interval_start;
  report.interval_length = plan.interval_length;
  DeltaQuantity dq = delta(h, v, cfg.b, cfg.W);
  report.delta_value = dq.value;
  double sum = 0.0;
  for (long long n = plan.interval_start; n < plan.interval_start + plan.interval_length; ++n) {
    double prod = 1.0;
    for (const auto& hj : h) {
      GaussianInt base = hj + GaussianInt{checked_mul(v.re, int128(n)), checked_mul(v.im, int128(n))};
      GaussianInt arg{checked_add(checked_mul(base.re, int128(cfg.W)), cfg.b.re),
                      checked_add(checked_mul(base.im, int128(cfg.W)), cfg.b.im)};
      double lam = is_zero(arg) ? 0.0 : truncated_mangoldt(arg, cfg.R, cfg.phi, table);
      prod *= lam * lam;
    }
    sum += prod;
  }
  report.lhs = sum / static_cast<double>(plan.interval_length);
  if (dq.zero()) {
    report.crude_path = true;
    return report;
  }
  double m = static_cast<double>(h.size());
  double W = static_cast<double>(cfg.W);
  double logNR = std::log(static_cast<double>(cfg.R) * static_cast<double>(cfg.R));
  double base = W * W * logNR / static_cast<double>(cfg.phi_W);
  double rhs = std::pow(base, m);
  for (long long q : detail::distinct_prime_divisors(dq.value, table)) {
    if (q % 4 != 1) continue;
    if (cfg.W % q == 0) continue;
    rhs *= std::pow(1.0 + plan.kappa / std::sqrt(static_cast<double>(q)), m * m);
  }
  report.rhs = rhs;
  report.pass = report.lhs <= plan.margin * rhs;
  return report;
}

}  // namespace constel

#endif
