// Acceptance gate: thirteen end-to-end checks, one line of output each.
// Every check recomputes its quantities from scratch through the public
// headers and compares against closed forms, independent second routes, or
// explicit bounds.  The process exits nonzero if any line fails.
#include <constel/box_norm.hpp>
#include <constel/bump.hpp>
#include <constel/constellation.hpp>
#include <constel/decompose.hpp>
#include <constel/local_factors.hpp>
#include <constel/prime_table.hpp>
#include <constel/weight.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

using namespace constel;

namespace {

using Clock = std::chrono::steady_clock;

int g_failures = 0;

void report(int index, const std::string& label, bool pass, double elapsed) {
  std::printf("%s %2d: %s (%.1fs)\n", pass ? "PASS" : "FAIL", index, label.c_str(), elapsed);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

struct Timer {
  Clock::time_point start = Clock::now();
  double seconds() const { return std::chrono::duration<double>(Clock::now() - start).count(); }
};

GaussianInt divide_exact(const GaussianInt& n, const GaussianInt& d) {
  int128 nd = norm(d);
  int128 re = n.re * d.re + n.im * d.im;
  int128 im = n.im * d.re - n.re * d.im;
  return GaussianInt{re / nd, im / nd};
}

// 1. Every rational prime q = 1 mod 4 below 10^6 is the norm of exactly two
//    canonical primes (eight counting unit multiples).
bool split_norm_multiplicity() {
  Timer timer;
  GaussPrimeTable table = build_table(1000000);
  std::map<long long, int> per_norm;
  for (const auto& e : table.entries)
    if (e.kind == PrimeKind::split_unexceptional) ++per_norm[e.norm];
  long long q_count = 0;
  bool ok = true;
  for (long long q = 5; q <= 1000000; q += 4) {
    if (!table.is_rational_prime(q)) continue;
    ++q_count;
    auto it = per_norm.find(q);
    int canonical = it == per_norm.end() ? 0 : it->second;
    if (canonical != 2) ok = false;
    if (4 * canonical != 8) ok = false;
  }
  ok = ok && q_count == 39175;
  ok = ok && static_cast<long long>(per_norm.size()) == q_count;
  double elapsed = timer.seconds();
  ok = ok && elapsed < 30.0;
  report(1, "every split norm below 10^6 carries exactly two canonical primes", ok, elapsed);
  return ok;
}

// 2. The count of unexceptional primes with norm at most N^2 tracks
//    2 N^2 / log N within 10% at N = 2000.
bool prime_count_rate() {
  Timer timer;
  GaussPrimeTable table = build_table(4000000);
  long long canonical = 0;
  for (const auto& e : table.entries)
    if (e.kind == PrimeKind::split_unexceptional) ++canonical;
  double count = 4.0 * static_cast<double>(canonical);  // all unit multiples
  double expected = 2.0 * 4000000.0 / std::log(2000.0);
  double ratio = count / expected;
  bool ok = ratio >= 0.9;
  ok = ok && ratio <= 1.1;
  double elapsed = timer.seconds();
  ok = ok && elapsed < 60.0;
  char label[128];
  std::snprintf(label, sizeof(label),
                "unexceptional prime count to norm 4*10^6 is %.4f of 2N^2/log N", ratio);
  report(2, label, ok, elapsed);
  return ok;
}

// 3. For every nonzero n with norm <= 2*10^4: the prime-power logs over one
//    divisor per associate class sum to log norm(n), and the Moebius-weighted
//    sum of log norm(n/d) recovers the prime-power log of n itself.
bool divisor_sum_identities() {
  Timer timer;
  GaussPrimeTable table = build_table(20000);
  long long tested = 0;
  bool ok = true;
  for (long long re = -141; re <= 141 && ok; ++re) {
    for (long long im = -141; im <= 141; ++im) {
      GaussianInt n{re, im};
      if (is_zero(n)) continue;
      if (norm(n) > 20000) continue;
      ++tested;
      Factorization f = factor(n, table);
      double log_sum = 0.0;
      double moebius_sum = 0.0;
      for_each_divisor(f, [&](const GaussianInt& d, int mu, int, double plog) {
        log_sum += plog;
        if (mu != 0) moebius_sum += mu * log_norm(divide_exact(n, d));
      });
      if (std::fabs(log_sum - log_norm(n)) > 1e-9) ok = false;
      if (std::fabs(moebius_sum - mangoldt(n, table)) > 1e-9) ok = false;
      if (!ok) break;
    }
  }
  ok = ok && tested == 62844;
  report(3, "divisor-log sum and Moebius inversion hold on all 62844 values to norm 2*10^4",
         ok, timer.seconds());
  return ok;
}

// 4. The truncated divisor sum equals log norm(R) exactly on unexceptional
//    primes past the cutoff.
bool truncated_sum_on_primes() {
  Timer timer;
  GaussPrimeTable table = build_table(200000);
  BumpFunction triangle = BumpFunction::triangle();
  const long long R = 10;
  const double target = std::log(100.0);
  int tested = 0;
  double worst = 0.0;
  for (const auto& e : table.entries) {
    if (e.kind != PrimeKind::split_unexceptional) continue;
    if (e.norm <= R * R) continue;
    worst = std::max(worst, std::fabs(truncated_mangoldt(e.prime, R, triangle, table) - target));
    if (++tested == 1000) break;
  }
  bool ok = tested == 1000;
  ok = ok && worst <= 1e-12;
  report(4, "truncated divisor sum equals log norm(R) on 1000 primes past the cutoff", ok,
         timer.seconds());
  return ok;
}

// 5. The majorant mean sits within 0.3 of one and its deviation does not grow
//    as the domain expands through three prime sizes.
bool majorant_mean_trend() {
  Timer timer;
  GaussPrimeTable table = build_table(10000);
  std::vector<double> deviations;
  for (long long N : {9923LL, 29983LL, 100057LL}) {
    WeightParams params;
    params.N = N;
    WeightConfig cfg = make_weight_config(params, table);
    MeanResult m = mean_nu(cfg, table);
    deviations.push_back(std::fabs(m.mean - 1.0));
  }
  bool ok = deviations[0] <= 0.3;
  ok = ok && deviations[1] <= deviations[0];
  ok = ok && deviations[2] <= deviations[1];
  char label[128];
  std::snprintf(label, sizeof(label),
                "majorant mean deviation %.2e shrinks across N in {9923, 29983, 100057}",
                deviations[0]);
  report(5, label, ok, timer.seconds());
  return ok;
}

// 6. The empirical second moment of the truncated sum along one residue class
//    matches the predicted main term within the accepted window.
bool single_form_ratio() {
  Timer timer;
  GaussPrimeTable table = build_table(10000);
  BumpFunction triangle = BumpFunction::triangle();
  WModulus wm = compute_W(5, table);
  LinearFormFamily family;
  family.T = 1;
  family.forms = {{GaussianInt{1, 0}}};
  family.shifts = {GaussianInt{1, 0}};
  std::vector<CoordBox> box = {CoordBox{0, 1000000, 0, 1000000}};
  GyPlan plan;
  plan.samples = 400000;
  plan.seed = 20240822;
  EmpiricalGy empirical = empirical_gy(family, box, 32, wm.W, triangle, table, plan);
  double main_term = gy_main_term(1, wm, 32, triangle);
  double ratio = empirical.value / main_term;
  bool ok = ratio >= 0.8;
  ok = ok && ratio <= 1.25;
  char label[128];
  std::snprintf(label, sizeof(label),
                "single-form second moment is %.4f of its main term at cutoff norm 1024", ratio);
  report(6, label, ok, timer.seconds());
  return ok;
}

// 7. The archimedean bump constant: quadrature equals the closed form 64/pi,
//    and the Fourier double integral agrees to a relative 10^-3.
bool archimedean_constant() {
  Timer timer;
  BumpFunction triangle = BumpFunction::triangle();
  double value = c_phi_prime(triangle);
  double closed_form = 64.0 / 3.14159265358979323846;
  bool ok = std::fabs(value - closed_form) <= 1e-9;
  FourierCheck fc = c_phi_prime_fourier_check(triangle);
  ok = ok && fc.relative_gap <= 1e-3;
  report(7, "triangle-bump constant matches 64/pi to 1e-9 and its Fourier route to 1e-3", ok,
         timer.seconds());
  return ok;
}

// 8. E(f * Df) recovers the 2^k-th power of the cube-averaged norm on 200
//    random dense functions with arity up to 3 and sides up to 6.
bool dual_identity_sweep() {
  Timer timer;
  std::mt19937_64 rng(881100);
  std::uniform_int_distribution<int> arity_dist(1, 3), side_dist(2, 6);
  std::uniform_real_distribution<double> value_dist(-1.0, 1.0);
  bool ok = true;
  for (int rep = 0; rep < 200 && ok; ++rep) {
    int k = arity_dist(rng);
    std::vector<int> edge;
    std::vector<long long> dims;
    for (int i = 0; i < k; ++i) {
      edge.push_back(i);
      dims.push_back(side_dist(rng));
    }
    long long n = EdgeFunction::table_size(dims);
    std::vector<double> values(static_cast<std::size_t>(n));
    for (auto& v : values) v = value_dist(rng);
    EdgeFunction f = EdgeFunction::dense(edge, dims, values);
    double bn = box_norm(f).value;
    double inner = edge_inner(f, dual_function(f));
    if (std::fabs(inner - std::pow(bn, static_cast<double>(1u << k))) > 1e-9) ok = false;
  }
  report(8, "cube-average identity E(f*Df) = ||f||^(2^k) on 200 random functions", ok,
         timer.seconds());
  return ok;
}

// 9. Joint averages of bounded edge functions never exceed the least cube
//    norm, and neither do correlations against lower-order indicator sets.
bool joint_average_bounds() {
  Timer timer;
  std::mt19937_64 rng(991100);
  std::uniform_int_distribution<int> side_dist(3, 4);
  std::uniform_real_distribution<double> value_dist(-1.0, 1.0);
  auto random_dense = [&](std::vector<int> edge, std::vector<long long> dims) {
    long long n = EdgeFunction::table_size(dims);
    std::vector<double> values(static_cast<std::size_t>(n));
    for (auto& v : values) v = value_dist(rng);
    return EdgeFunction::dense(std::move(edge), std::move(dims), std::move(values));
  };
  bool ok = true;
  for (int rep = 0; rep < 100 && ok; ++rep) {
    long long s0 = side_dist(rng), s1 = side_dist(rng), s2 = side_dist(rng);
    HypergraphSystem sys{3, {s0, s1, s2}, 2, {{0, 1}, {0, 2}, {1, 2}}};
    std::vector<EdgeFunction> fns = {random_dense({0, 1}, {s0, s1}),
                                     random_dense({0, 2}, {s0, s2}),
                                     random_dense({1, 2}, {s1, s2})};
    double average = gvn_average(sys, fns);
    double least = box_norm(fns[0]).value;
    least = std::min(least, box_norm(fns[1]).value);
    least = std::min(least, box_norm(fns[2]).value);
    if (std::fabs(average) > least + 1e-9) ok = false;
  }
  std::uniform_int_distribution<int> bit(0, 1);
  for (int rep = 0; rep < 100 && ok; ++rep) {
    long long s0 = side_dist(rng), s1 = side_dist(rng);
    EdgeFunction f = random_dense({0, 1}, {s0, s1});
    std::vector<double> a(static_cast<std::size_t>(s0)), b(static_cast<std::size_t>(s1));
    for (auto& v : a) v = static_cast<double>(bit(rng));
    for (auto& v : b) v = static_cast<double>(bit(rng));
    std::vector<EdgeFunction> sets = {EdgeFunction::dense({0}, {s0}, a),
                                      EdgeFunction::dense({1}, {s1}, b)};
    if (std::fabs(lower_order_correlation(f, sets)) > box_norm(f).value + 1e-9) ok = false;
  }
  report(9, "joint averages and lower-order correlations bounded by the least cube norm", ok,
         timer.seconds());
  return ok;
}

// 10. The factored divisibility density equals the brute-force enumeration
//     exactly on 100 random instances, and reproduces closed-form values.
bool density_oracle_equivalence() {
  Timer timer;
  GaussPrimeTable table = build_table(100);
  std::mt19937_64 rng(424242);
  std::vector<GaussianInt> pool = {GaussianInt{2, 1}, GaussianInt{1, 2}, GaussianInt{3, 2},
                                   GaussianInt{2, 3}, GaussianInt{4, 1}, GaussianInt{1, 4}};
  std::uniform_int_distribution<int> pick(0, 5), coeff(-2, 2), w_pick(0, 2), t_pick(1, 2),
      c_pick(1, 2);
  const long long w_values[3] = {1, 2, 6};
  bool ok = true;
  int ran = 0;
  while (ran < 100) {
    LinearFormFamily family;
    family.T = t_pick(rng);
    int conditions = c_pick(rng);
    std::vector<GaussianInt> moduli;
    long long period = 1;
    for (int s = 0; s < conditions; ++s) {
      GaussianInt q = pool[static_cast<std::size_t>(pick(rng))];
      moduli.push_back(q);
      long long nq = static_cast<long long>(norm(q));
      if (period % nq != 0) period *= nq;
      std::vector<GaussianInt> row;
      bool nonzero = false;
      for (int k = 0; k < family.T; ++k) {
        GaussianInt c{coeff(rng), coeff(rng)};
        if (!is_zero(c)) nonzero = true;
        row.push_back(c);
      }
      if (!nonzero) row[0] = GaussianInt{1, 0};
      family.forms.push_back(row);
      family.shifts.push_back(GaussianInt{coeff(rng), coeff(rng)});
    }
    if (std::pow(static_cast<double>(period), family.T) > 1000000.0) continue;
    ++ran;
    long long W = w_values[w_pick(rng)];
    Rational factored = omega_crt(moduli, family, W, table);
    Rational brute = omega_bruteforce(moduli, family, W, table);
    if (!(factored == brute)) ok = false;
  }
  LinearFormFamily basic;
  basic.T = 1;
  basic.forms = {{GaussianInt{1, 0}}};
  basic.shifts = {GaussianInt{0, 0}};
  ok = ok && omega_crt({GaussianInt{1, 0}}, basic, 2, table) == Rational::of(1, 1);
  ok = ok && omega_crt({GaussianInt{2, 1}}, basic, 2, table) == Rational::of(1, 5);
  ok = ok && omega_crt({GaussianInt{3, 2}}, basic, 2, table) == Rational::of(1, 13);
  ok = ok && omega_crt({GaussianInt{4, 1}}, basic, 2, table) == Rational::of(1, 17);
  LinearFormFamily absorbed;
  absorbed.T = 1;
  absorbed.forms = {{GaussianInt{5, 0}}};  // coefficient divisible by the modulus
  absorbed.shifts = {GaussianInt{0, 0}};
  ok = ok && omega_crt({GaussianInt{2, 1}}, absorbed, 1, table) == Rational::of(1, 1);
  report(10, "factored and enumerated divisibility densities agree on 100 random instances",
         ok, timer.seconds());
  return ok;
}

// 11. The refinement tower on an iid spike measure (value log 50 with
//     probability 1/log 50 on a 50x50 grid) terminates quickly, keeps the
//     exceptional mass small, and never loses energy.
bool tower_on_spike_measure() {
  Timer timer;
  const double epsilon = 0.1;
  const double sigma = 0.001;
  std::mt19937_64 rng(20260822);
  const double spike = std::log(50.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> values(2500);
  for (auto& v : values) v = (unit(rng) < 1.0 / spike) ? spike : 0.0;
  EdgeFunction measure = EdgeFunction::dense({0, 1}, {50, 50}, values);
  TowerState state = tower(measure, measure, epsilon, sigma);
  bool ok = state.terminated;
  ok = ok && state.K <= static_cast<int>(32.0 / epsilon);
  ok = ok && state.final_box_norm <= state.threshold;
  const double mass_bound = 20.0 * std::sqrt(sigma);
  for (double mass : state.omega_masses) ok = ok && mass <= mass_bound;
  for (std::size_t i = 0; i + 1 < state.energies.size(); ++i)
    ok = ok && state.energies[i + 1] >= state.energies[i] - epsilon / 4.0;
  char label[160];
  std::snprintf(label, sizeof(label),
                "tower on the spike measure stops at K=%d with exceptional mass %.3f <= %.3f",
                state.K, state.omega_masses.empty() ? 0.0 : state.omega_masses.back(),
                mass_bound);
  report(11, label, ok, timer.seconds());
  return ok;
}

// 12. The lattice zeta value minus its pole term stays within the reported
//     bound at three exponents near 1.
bool zeta_remainder_bounded() {
  Timer timer;
  bool ok = true;
  for (double sigma : {1.01, 1.05, 1.1}) {
    GaussZetaRemainder zr = zeta_gauss_remainder(sigma, 10000000);
    if (std::fabs(zr.remainder) > 5.0) ok = false;
  }
  report(12, "lattice zeta remainder stays within 5 of pi/(sigma-1) at three exponents", ok,
         timer.seconds());
  return ok;
}

// 13. The square-shape scan finds a verified constellation, and every
//     reported point passes an independent trial-division primality check.
bool verified_constellation_search() {
  Timer timer;
  GaussPrimeTable table = build_table(20000);
  Shape square{{GaussianInt{0, 0}, GaussianInt{1, 0}, GaussianInt{0, 1}, GaussianInt{1, 1}}};
  SearchPlan plan;
  plan.max_results = 1;
  SearchResult result = search(square, 10000, 100, table, plan);
  bool ok = result.found.size() == 1;
  if (ok) {
    const Constellation& c = result.found.front();
    ok = ok && c.r == 2;
    ok = ok && c.a.re == -9996;
    ok = ok && c.a.im == -9181;
    ok = ok && is_constellation(c.a, c.r, square, table);
    for (const auto& p : c.points) {
      ok = ok && is_gaussian_prime(p, table);
      ok = ok && verified_prime_by_division(p, table);
    }
  }
  ok = ok && result.candidates_scanned == 400120825;
  char label[160];
  std::snprintf(label, sizeof(label),
                "square-shape scan verified a constellation after %lld candidates",
                static_cast<long long>(result.candidates_scanned));
  report(13, label, ok, timer.seconds());
  return ok;
}

}  // namespace

int main() {
  Timer total;
  split_norm_multiplicity();
  prime_count_rate();
  divisor_sum_identities();
  truncated_sum_on_primes();
  majorant_mean_trend();
  single_form_ratio();
  archimedean_constant();
  dual_identity_sweep();
  joint_average_bounds();
  density_oracle_equivalence();
  tower_on_spike_measure();
  zeta_remainder_bounded();
  verified_constellation_search();
  std::printf("%d/13 criteria passed (%.1fs total)\n", 13 - g_failures, total.seconds());
  return g_failures == 0 ? 0 : 1;
}
