#ifndef CONSTEL_WEIGHT_HPP
#define CONSTEL_WEIGHT_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "constel/bump.hpp"
#include "constel/gaussian_int.hpp"
#include "constel/prime_table.hpp"

namespace constel {

// Truncated divisor sum: log N(R) times the alternating cutoff sum over
// subsets of the distinct first-quadrant unexceptional primes p | n with
// N(p) <= R^2.  Equals log N(R) exactly whenever no such prime divides n.
inline double truncated_mangoldt(const GaussianInt& n, long long R, const BumpFunction& phi,
                                 const GaussPrimeTable& table) {
  if (R < 2) throw std::invalid_argument("cutoff R must be at least 2");
  if (is_zero(n)) throw std::invalid_argument("truncated divisor sum needs a nonzero argument");
  long long NR = R * R;
  if (table.norm_bound < NR) throw CoverageError(NR);
  std::vector<double> logs;
  for (const auto& entry : table.entries) {
    if (entry.norm > NR) break;
    if (entry.kind != PrimeKind::split_unexceptional) continue;
    if (divides(entry.prime, n)) logs.push_back(std::log(static_cast<double>(entry.norm)));
  }
  if (logs.size() > 30) throw std::length_error("too many prime divisors below cutoff");
  double logNR = std::log(static_cast<double>(NR));
  double sum = 0.0;
  std::uint32_t masks = 1u << logs.size();
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    double acc = 0.0;
    int bits = 0;
    for (std::size_t i = 0; i < logs.size(); ++i)
      if (mask >> i & 1u) {
        acc += logs[i];
        ++bits;
      }
    double term = phi.eval(acc / logNR);
    sum += (bits & 1) ? -term : term;
  }
  return logNR * sum;
}

// Product of the norms of the first-quadrant primes with norm at most w,
// together with the multiplicative totient of that modulus.
struct WModulus {
  long long W = 1;
  long long phi_W = 1;
};

inline WModulus compute_W(long long w, const GaussPrimeTable& table) {
  if (w < 0) throw std::invalid_argument("smooth cutoff must be nonnegative");
  if (w >= 2 && table.norm_bound < w) throw CoverageError(w);
  WModulus m;
  int128 W = 1;
  for (const auto& entry : table.entries) {
    if (entry.norm > w) break;
    W = checked_mul(W, entry.norm);
  }
  int128 phi = checked_mul(W, W);
  for (const auto& entry : table.entries) {
    if (entry.norm > w) break;
    phi = phi / entry.norm * (entry.norm - 1);
  }
  if (W > int128(4000000000LL)) throw std::range_error("modulus too large for exact totient");
  m.W = static_cast<long long>(W);
  m.phi_W = static_cast<long long>(phi);
  return m;
}

// Counts of unexceptional primes in the annulus eps^2 N^2 / 2 <= N(m) <= eps^2 N^2
// split by residue class of m modulo W (class index re * W + im, components
// reduced into [0, W)).
struct AnnulusCensus {
  long long W = 1;
  std::vector<long long> counts;
  long long total = 0;
};

inline AnnulusCensus annulus_census(long long N, double epsilon, long long W,
                                    const GaussPrimeTable& table) {
  if (N < 3 || W < 1) throw std::invalid_argument("bad annulus parameters");
  AnnulusCensus census;
  census.W = W;
  census.counts.assign(static_cast<std::size_t>(W * W), 0);
  long double thr = static_cast<long double>(epsilon) * epsilon * N * N;
  long long hi = static_cast<long long>(std::floor(thr));
  long long lo = static_cast<long long>(std::ceil(thr / 2.0L));
  if (hi < 5) return census;
  long long A = static_cast<long long>(std::floor(std::sqrt(static_cast<long double>(hi)))) + 1;
  for (long long re = -A; re <= A; ++re) {
    for (long long im = -A; im <= A; ++im) {
      long long nrm = re * re + im * im;
      if (nrm < lo || nrm > hi) continue;
      if (nrm % 4 != 1) continue;
      if (!table.is_rational_prime(nrm)) continue;
      long long cr = ((re % W) + W) % W;
      long long ci = ((im % W) + W) % W;
      ++census.counts[static_cast<std::size_t>(cr * W + ci)];
      ++census.total;
    }
  }
  return census;
}

struct ResidueChoice {
  GaussianInt b;
  long long count = 0;
};

// Residue class coprime to W holding the most annulus primes; ties broken by
// smallest (re, im).  Falls back to b = 1 when the annulus is empty.
inline ResidueChoice choose_b(long long N, double epsilon, long long W,
                              const GaussPrimeTable& table) {
  AnnulusCensus census = annulus_census(N, epsilon, W, table);
  GaussianInt Wg{W, 0};
  ResidueChoice best;
  best.b = GaussianInt{1, 0};
  best.count = -1;
  for (long long re = 0; re < W; ++re) {
    for (long long im = 0; im < W; ++im) {
      GaussianInt b{re, im};
      if (W > 1) {
        if (is_zero(b)) continue;
        if (!is_unit(gcd(b, Wg))) continue;
      }
      long long c = census.counts[static_cast<std::size_t>(re * W + im)];
      if (c > best.count) {
        best.b = b;
        best.count = c;
      }
    }
  }
  if (best.count < 0) best.count = 0;
  return best;
}

// Everything needed to evaluate the pseudorandom majorant on Z[i]/(N).
struct WeightConfig {
  long long N = 3;
  double epsilon = 0.0078125;  // 1/128
  long long w = 5;
  double c_exponent = 0.05;
  long long W = 1;
  long long phi_W = 1;
  GaussianInt b{1, 0};
  long long R = 2;
  double C_phi = 1.0;
  BumpFunction phi = BumpFunction::triangle();
};

struct WeightParams {
  long long N = 3;
  double epsilon = 0.0078125;
  long long w = 5;
  double c_exponent = 0.05;
  BumpFunction phi = BumpFunction::triangle();
  std::optional<GaussianInt> b_override;
  double C_phi_override = 0.0;  // <= 0 means: normalize so the mean is near 1
};

inline WeightConfig make_weight_config(const WeightParams& params, const GaussPrimeTable& table) {
  if (params.N < 3 || !table.is_rational_prime(params.N))
    throw std::invalid_argument("domain size N must be a rational prime >= 3");
  if (!(params.epsilon > 0.0) || params.epsilon > 1.0)
    throw std::invalid_argument("epsilon must lie in (0, 1]");
  if (!(params.c_exponent > 0.0) || params.c_exponent >= 1.0)
    throw std::invalid_argument("cutoff exponent must lie in (0, 1)");
  WeightConfig cfg;
  cfg.N = params.N;
  cfg.epsilon = params.epsilon;
  cfg.w = params.w;
  cfg.c_exponent = params.c_exponent;
  cfg.phi = params.phi;
  WModulus wm = compute_W(params.w, table);
  cfg.W = wm.W;
  cfg.phi_W = wm.phi_W;
  long double Rf = std::pow(static_cast<long double>(params.N),
                            static_cast<long double>(params.c_exponent));
  cfg.R = std::max<long long>(2, static_cast<long long>(std::llround(Rf)));
  if (params.b_override) {
    GaussianInt b = *params.b_override;
    if (cfg.W > 1 && !is_unit(gcd(b, GaussianInt{cfg.W, 0})))
      throw std::invalid_argument("residue override shares a factor with W");
    cfg.b = b;
  } else {
    cfg.b = choose_b(params.N, params.epsilon, cfg.W, table).b;
  }
  cfg.C_phi = params.C_phi_override > 0.0
                  ? params.C_phi_override
                  : 3.14159265358979323846 / (4.0 * derivative_energy(params.phi));
  return cfg;
}

namespace detail {
// Weight at an already-centred lattice point (components in (-N/2, N/2)).
inline double nu_centered(const GaussianInt& c, const WeightConfig& cfg,
                          const GaussPrimeTable& table) {
  long double thr = static_cast<long double>(cfg.epsilon) * cfg.epsilon * cfg.N * cfg.N;
  if (thr < 1.0L) return 1.0;  // disk too small to hold any scale: trivial weight
  long double nrm = static_cast<long double>(to_double_128(norm(c)));
  if (nrm > thr) return 1.0;
  GaussianInt arg{checked_add(checked_mul(int128(cfg.W), c.re), cfg.b.re),
                  checked_add(checked_mul(int128(cfg.W), c.im), cfg.b.im)};
  if (is_zero(arg)) return 1.0;
  double lam = truncated_mangoldt(arg, cfg.R, cfg.phi, table);
  double logNR = std::log(static_cast<double>(cfg.R) * static_cast<double>(cfg.R));
  double Wd = static_cast<double>(cfg.W);
  return cfg.C_phi * (static_cast<double>(cfg.phi_W) / (Wd * Wd)) * lam * lam / logNR;
}

inline GaussianInt centre_mod_N(const GaussianInt& x, long long N) {
  int128 re = ((x.re % N) + N) % N;
  int128 im = ((x.im % N) + N) % N;
  if (2 * re > N) re -= N;
  if (2 * im > N) im -= N;
  return GaussianInt{re, im};
}
}  // namespace detail

// The majorant nu on Z[i]/(N): the divisor-sum square on the small centred
// disk N(pi^{-1} x) <= eps^2 N^2, and 1 elsewhere.
inline double nu(const GaussianInt& x, const WeightConfig& cfg, const GaussPrimeTable& table) {
  return detail::nu_centered(detail::centre_mod_N(x, cfg.N), cfg, table);
}

struct MeanPlan {
  enum class Mode { exhaustive, monte_carlo };
  Mode mode = Mode::exhaustive;
  long long samples = 200000;
  std::uint64_t seed = 1;
};

struct MeanResult {
  double mean = 0.0;
  double std_error = 0.0;
  bool exact = false;
  long long evaluated = 0;
};

// Average of nu over all N^2 points.  The exhaustive mode only walks the disk
// (off-disk points contribute exactly 1), so it is exact and fast; the Monte
// Carlo mode samples the torus uniformly and reports a standard error.
inline MeanResult mean_nu(const WeightConfig& cfg, const GaussPrimeTable& table,
                          const MeanPlan& plan = MeanPlan{}) {
  MeanResult result;
  if (plan.mode == MeanPlan::Mode::exhaustive) {
    long double thr = static_cast<long double>(cfg.epsilon) * cfg.epsilon * cfg.N * cfg.N;
    double deviation = 0.0;
    long long visited = 0;
    if (thr >= 1.0L) {
      long long A = static_cast<long long>(std::floor(std::sqrt(static_cast<double>(thr)))) + 1;
      for (long long re = -A; re <= A; ++re) {
        for (long long im = -A; im <= A; ++im) {
          if (static_cast<long double>(re) * re + static_cast<long double>(im) * im > thr)
            continue;
          deviation += detail::nu_centered(GaussianInt{re, im}, cfg, table) - 1.0;
          ++visited;
        }
      }
    }
    double total = static_cast<double>(cfg.N) * static_cast<double>(cfg.N);
    result.mean = 1.0 + deviation / total;
    result.std_error = 0.0;
    result.exact = true;
    result.evaluated = visited;
    return result;
  }
  if (plan.samples < 2) throw std::invalid_argument("need at least two samples");
  std::mt19937_64 rng(plan.seed);
  std::uniform_int_distribution<long long> coord(0, cfg.N - 1);
  double sum = 0.0, sumsq = 0.0;
  for (long long i = 0; i < plan.samples; ++i) {
    GaussianInt x{coord(rng), coord(rng)};
    double v = nu(x, cfg, table);
    sum += v;
    sumsq += v * v;
  }
  double n = static_cast<double>(plan.samples);
  result.mean = sum / n;
  double var = std::max(0.0, (sumsq - sum * sum / n) / (n - 1.0));
  result.std_error = std::sqrt(var / n);
  result.exact = false;
  result.evaluated = plan.samples;
  return result;
}

// Hypergraph measure data read off nu for a k-point shape: one edge per
// omitted vertex, with coefficients v_k - v_j pairing the remaining
// coordinates, so the edge weight omitting j at coordinates (x_k) is
// nu(sum_k (v_k - v_j) x_k).
struct MeasureEdge {
  int omitted = 0;
  std::vector<int> members;
  std::vector<GaussianInt> coeffs;
};

struct MeasureSystem {
  std::vector<GaussianInt> shape;
  WeightConfig config;
  const GaussPrimeTable* table = nullptr;
  std::vector<MeasureEdge> edges;

  double edge_value(std::size_t edge_index, const std::vector<GaussianInt>& coords) const {
    const MeasureEdge& e = edges.at(edge_index);
    if (coords.size() != e.members.size())
      throw std::invalid_argument("coordinate count does not match edge arity");
    GaussianInt acc{0, 0};
    for (std::size_t i = 0; i < coords.size(); ++i) acc = acc + e.coeffs[i] * coords[i];
    return nu(acc, config, *table);
  }
};

inline MeasureSystem measure_system_from_nu(const std::vector<GaussianInt>& shape,
                                            const WeightConfig& cfg,
                                            const GaussPrimeTable& table) {
  if (shape.size() < 2) throw std::invalid_argument("shape needs at least two points");
  for (std::size_t i = 0; i < shape.size(); ++i)
    for (std::size_t j = i + 1; j < shape.size(); ++j)
      if (shape[i] == shape[j]) throw std::invalid_argument("shape points must be distinct");
  MeasureSystem sys;
  sys.shape = shape;
  sys.config = cfg;
  sys.table = &table;
  int k = static_cast<int>(shape.size());
  for (int j = 0; j < k; ++j) {
    MeasureEdge edge;
    edge.omitted = j;
    for (int m = 0; m < k; ++m) {
      if (m == j) continue;
      edge.members.push_back(m);
      edge.coeffs.push_back(shape[static_cast<std::size_t>(m)] - shape[static_cast<std::size_t>(j)]);
    }
    sys.edges.push_back(std::move(edge));
  }
  return sys;
}

}  // namespace constel

#endif
