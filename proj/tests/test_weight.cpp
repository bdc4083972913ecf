#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

#include "constel/bump.hpp"
#include "constel/gaussian_int.hpp"
#include "constel/prime_table.hpp"
#include "constel/weight.hpp"

using namespace constel;

namespace {
GaussianInt g(long long re, long long im) { return GaussianInt{re, im}; }

const GaussPrimeTable& shared_table() {
  static GaussPrimeTable t = build_table(1000000);
  return t;
}
}  // namespace

TEST_CASE("bump functions are even cutoffs with value one at zero", "[weight]") {
  auto smooth = BumpFunction::smooth_standard();
  auto tri = BumpFunction::triangle();
  auto sampled = BumpFunction::user_sampled({{-1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}});
  for (const auto* b : {&smooth, &tri, &sampled}) {
    CHECK(b->eval(0.0) == Catch::Approx(1.0).margin(1e-15));
    CHECK(b->eval(1.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(b->eval(-1.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(b->eval(1.7) == 0.0);
    CHECK(b->eval(-2.5) == 0.0);
    for (double x : {0.1, 0.35, 0.62, 0.99}) {
      CHECK(b->eval(x) == Catch::Approx(b->eval(-x)).margin(1e-15));
      CHECK(b->eval(x) >= 0.0);
    }
  }
  CHECK(tri.eval(0.25) == Catch::Approx(0.75).margin(1e-15));
  CHECK(smooth.eval(0.5) == Catch::Approx(std::exp(1.0 - 1.0 / 0.75)).margin(1e-15));
  auto ramp = BumpFunction::user_sampled({{-1.0, 0.0}, {-0.5, 0.8}, {0.0, 1.0}, {0.5, 0.8}, {1.0, 0.0}});
  CHECK(ramp.eval(-0.5) == Catch::Approx(0.8).margin(1e-15));
  CHECK(ramp.eval(0.25) == Catch::Approx(0.9).margin(1e-15));
  CHECK(ramp.eval(0.75) == Catch::Approx(0.4).margin(1e-15));
  CHECK_THROWS_AS(BumpFunction::user_sampled({{0.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(BumpFunction::user_sampled({{-2.0, 0.0}, {0.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("analytic derivatives agree with central differences", "[weight]") {
  auto smooth = BumpFunction::smooth_standard();
  auto tri = BumpFunction::triangle();
  double h = 1e-6;
  for (double x : {0.1, 0.3, 0.55, 0.8}) {
    double numeric = (smooth.eval(x + h) - smooth.eval(x - h)) / (2 * h);
    CHECK(smooth.deriv(x) == Catch::Approx(numeric).margin(1e-6));
    CHECK(tri.deriv(x) == -1.0);
    CHECK(tri.deriv(-x) == 1.0);
  }
  auto ramp = BumpFunction::user_sampled({{-1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}});
  CHECK(ramp.deriv(0.5) == Catch::Approx(-1.0).margin(1e-15));
  CHECK(ramp.deriv(-0.25) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("squared-derivative energy integrates exactly for the triangle", "[weight]") {
  CHECK(derivative_energy(BumpFunction::triangle()) == Catch::Approx(1.0).margin(1e-13));
  auto replica = BumpFunction::user_sampled({{-1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}});
  CHECK(derivative_energy(replica) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("smooth bump energy matches an independent Riemann sum", "[weight]") {
  auto smooth = BumpFunction::smooth_standard();
  double adaptive = derivative_energy(smooth);
  // Midpoint rule on a fine fixed grid as an independent cross-check.
  long long n = 2000000;
  double h = 1.0 / static_cast<double>(n);
  double riemann = 0.0;
  for (long long k = 0; k < n; ++k) {
    double x = (static_cast<double>(k) + 0.5) * h;
    double d = smooth.deriv(x);
    riemann += d * d * h;
  }
  CHECK(adaptive == Catch::Approx(riemann).margin(1e-8));
  // Stripping the analytic derivative falls back to finite differences.
  BumpFunction numeric = smooth;
  numeric.deriv = nullptr;
  CHECK(derivative_energy(numeric, 1 << 20) == Catch::Approx(adaptive).margin(1e-6));
}

TEST_CASE("truncated divisor sum reproduces pinned values", "[weight]") {
  const auto& t = shared_table();
  auto tri = BumpFunction::triangle();
  CHECK(truncated_mangoldt(g(5, 0), 4, tri, t) ==
        Catch::Approx(0.446287102628419).margin(1e-12));
  CHECK(truncated_mangoldt(g(5, 0), 8, tri, t) == Catch::Approx(0.0).margin(1e-12));
  CHECK(truncated_mangoldt(g(2, 1), 8, tri, t) ==
        Catch::Approx(std::log(5.0)).margin(1e-12));
  CHECK(truncated_mangoldt(g(1, 0), 8, tri, t) ==
        Catch::Approx(std::log(64.0)).margin(1e-12));
  CHECK(truncated_mangoldt(g(50, 0), 8, tri, t) == Catch::Approx(0.0).margin(1e-12));
  CHECK(truncated_mangoldt(g(123, 45), 8, tri, t) ==
        Catch::Approx(std::log(64.0)).margin(1e-12));
  // No prime of norm at most 16 divides 4+i, so the sum sits on its plateau.
  CHECK(truncated_mangoldt(g(4, 1), 4, tri, t) ==
        Catch::Approx(std::log(16.0)).margin(1e-12));
  CHECK_THROWS_AS(truncated_mangoldt(g(5, 0), 1, tri, t), std::invalid_argument);
  CHECK_THROWS_AS(truncated_mangoldt(g(0, 0), 4, tri, t), std::invalid_argument);
  GaussPrimeTable tiny = build_table(10);
  CHECK_THROWS_AS(truncated_mangoldt(g(5, 0), 8, tri, tiny), CoverageError);
}

TEST_CASE("truncated divisor sum matches a hand-expanded four-prime case", "[weight]") {
  const auto& t = shared_table();
  auto tri = BumpFunction::triangle();
  // 65 = (2+i)(1+2i)(3+2i)(2+3i); all four norm-5/13 primes sit below 64.
  double l64 = std::log(64.0);
  double lp[4] = {std::log(5.0), std::log(5.0), std::log(13.0), std::log(13.0)};
  double expect = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) {
          double acc = a * lp[0] + b * lp[1] + c * lp[2] + d * lp[3];
          double sign = ((a + b + c + d) % 2 == 0) ? 1.0 : -1.0;
          expect += sign * std::max(1.0 - acc / l64, 0.0);
        }
  expect *= l64;
  CHECK(truncated_mangoldt(g(65, 0), 8, tri, t) == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("primes beyond the cutoff take the exact plateau value", "[weight]") {
  const auto& t = shared_table();
  auto tri = BumpFunction::triangle();
  double plateau = std::log(64.0);
  int checked = 0;
  for (const auto& entry : t.entries) {
    if (entry.kind != PrimeKind::split_unexceptional) continue;
    if (entry.norm <= 64) continue;
    CHECK(truncated_mangoldt(entry.prime, 8, tri, t) == Catch::Approx(plateau).epsilon(1e-14));
    if (++checked >= 500) break;
  }
  CHECK(checked == 500);
}

TEST_CASE("smooth-cutoff modulus and totient take pinned values", "[weight]") {
  const auto& t = shared_table();
  WModulus w0 = compute_W(0, t);
  CHECK(w0.W == 1);
  CHECK(w0.phi_W == 1);
  WModulus w2 = compute_W(2, t);
  CHECK(w2.W == 2);
  CHECK(w2.phi_W == 2);
  WModulus w5 = compute_W(5, t);
  CHECK(w5.W == 50);
  CHECK(w5.phi_W == 800);
  WModulus w10 = compute_W(10, t);
  CHECK(w10.W == 450);
  CHECK(w10.phi_W == 57600);
  CHECK_THROWS_AS(compute_W(-1, t), std::invalid_argument);
}

TEST_CASE("totient counts residues with no common factor", "[weight]") {
  const auto& t = shared_table();
  for (long long w : {2LL, 5LL}) {
    WModulus m = compute_W(w, t);
    GaussianInt Wg{m.W, 0};
    long long count = 0;
    for (long long re = 0; re < m.W; ++re)
      for (long long im = 0; im < m.W; ++im) {
        GaussianInt b{re, im};
        if (is_zero(b)) continue;
        if (is_unit(gcd(b, Wg))) ++count;
      }
    CHECK(count == m.phi_W);
  }
}

TEST_CASE("annulus census partitions the unexceptional primes", "[weight]") {
  const auto& t = shared_table();
  long long N = 997;
  double eps = 0.125;
  WModulus wm = compute_W(5, t);
  AnnulusCensus census = annulus_census(N, eps, wm.W, t);
  CHECK(census.total > 0);
  GaussianInt Wg{wm.W, 0};
  long long coprime_sum = 0;
  for (long long re = 0; re < wm.W; ++re)
    for (long long im = 0; im < wm.W; ++im) {
      long long c = census.counts[static_cast<std::size_t>(re * wm.W + im)];
      GaussianInt b{re, im};
      bool coprime = !is_zero(b) && is_unit(gcd(b, Wg));
      if (coprime) {
        coprime_sum += c;
      } else {
        // A prime this deep in the annulus cannot share a factor with W.
        CHECK(c == 0);
      }
    }
  CHECK(coprime_sum == census.total);
  ResidueChoice choice = choose_b(N, eps, wm.W, t);
  CHECK(is_unit(gcd(choice.b, Wg)));
  CHECK(choice.count > 0);
  for (long long re = 0; re < wm.W; ++re)
    for (long long im = 0; im < wm.W; ++im)
      CHECK(census.counts[static_cast<std::size_t>(re * wm.W + im)] <= choice.count);
}

TEST_CASE("weight configuration assembles pinned parameters", "[weight]") {
  const auto& t = shared_table();
  WeightParams params;
  params.N = 997;
  params.epsilon = 0.125;
  params.w = 5;
  params.c_exponent = 0.05;
  params.phi = BumpFunction::triangle();
  WeightConfig cfg = make_weight_config(params, t);
  CHECK(cfg.W == 50);
  CHECK(cfg.phi_W == 800);
  CHECK(cfg.R == 2);  // 997^0.05 rounds to 1, floored at the minimum cutoff 2
  CHECK(cfg.C_phi == Catch::Approx(3.14159265358979323846 / 4.0).margin(1e-12));
  CHECK(is_unit(gcd(cfg.b, GaussianInt{50, 0})));

  params.b_override = GaussianInt{5, 0};  // shares 2+i with W = 50
  CHECK_THROWS_AS(make_weight_config(params, t), std::invalid_argument);
  params.b_override = GaussianInt{1, 0};
  WeightConfig forced = make_weight_config(params, t);
  CHECK(forced.b == g(1, 0));

  WeightParams bad = params;
  bad.N = 999;  // composite
  CHECK_THROWS_AS(make_weight_config(bad, t), std::invalid_argument);
  bad = params;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(make_weight_config(bad, t), std::invalid_argument);
  bad = params;
  bad.c_exponent = 1.0;
  CHECK_THROWS_AS(make_weight_config(bad, t), std::invalid_argument);
}

TEST_CASE("weight is the scaled divisor-sum square on the disk and one outside", "[weight]") {
  const auto& t = shared_table();
  WeightParams params;
  params.N = 997;
  params.epsilon = 0.125;
  WeightConfig cfg = make_weight_config(params, t);

  // Off-disk points: N(centre) > eps^2 N^2 = 15531.39...
  CHECK(nu(g(498, 0), cfg, t) == 1.0);
  CHECK(nu(g(300, 300), cfg, t) == 1.0);
  // Reduction mod N wraps before centring.
  CHECK(nu(g(498 + 997, 0), cfg, t) == 1.0);
  CHECK(nu(g(-499, 0), cfg, t) == nu(g(498, 0), cfg, t));

  // With R = 2 no unexceptional prime has norm at most 4, so the divisor sum
  // is the constant log 4 on every nonzero argument and the disk value is flat.
  double flat = cfg.C_phi * (800.0 / 2500.0) * std::log(4.0);
  CHECK(nu(g(0, 0), cfg, t) == Catch::Approx(flat).margin(1e-12));
  CHECK(nu(g(17, 30), cfg, t) == Catch::Approx(flat).margin(1e-12));
  CHECK(nu(g(100, 50), cfg, t) == Catch::Approx(flat).margin(1e-12));
}

TEST_CASE("weight honours a larger divisor-sum cutoff", "[weight]") {
  const auto& t = shared_table();
  WeightConfig cfg;
  cfg.N = 997;
  cfg.epsilon = 0.125;
  cfg.w = 5;
  cfg.W = 50;
  cfg.phi_W = 800;
  cfg.b = g(1, 0);
  cfg.R = 8;
  cfg.C_phi = 1.0;
  cfg.phi = BumpFunction::triangle();
  // x = 1 gives argument 51 = 3 * 17; only the split norm-17 primes register.
  double l64 = std::log(64.0);
  double lam = l64 * (1.0 - 2.0 * (1.0 - std::log(17.0) / l64));
  double expect = (800.0 / 2500.0) * lam * lam / l64;
  CHECK(nu(g(1, 0), cfg, t) == Catch::Approx(expect).margin(1e-12));
  // x = 2 gives argument 101, an unexceptional prime beyond the cutoff:
  // the divisor sum sits on its plateau log 64.
  double plateau = (800.0 / 2500.0) * l64;
  CHECK(nu(g(2, 0), cfg, t) == Catch::Approx(plateau).margin(1e-12));
}

TEST_CASE("degenerate scale collapses the weight to one", "[weight]") {
  const auto& t = shared_table();
  WeightConfig cfg;
  cfg.N = 997;
  cfg.epsilon = 1e-6;
  cfg.W = 50;
  cfg.phi_W = 800;
  cfg.b = g(1, 0);
  cfg.R = 2;
  cfg.C_phi = 1.0;
  cfg.phi = BumpFunction::triangle();
  CHECK(nu(g(0, 0), cfg, t) == 1.0);
  CHECK(nu(g(5, 5), cfg, t) == 1.0);
  MeanResult mr = mean_nu(cfg, t);
  CHECK(mr.exact);
  CHECK(mr.mean == 1.0);
  CHECK(mr.evaluated == 0);
}

TEST_CASE("exhaustive mean agrees with Monte Carlo within three sigma", "[weight]") {
  const auto& t = shared_table();
  WeightParams params;
  params.N = 997;
  params.epsilon = 0.125;
  WeightConfig cfg = make_weight_config(params, t);

  MeanResult exact = mean_nu(cfg, t);
  CHECK(exact.exact);
  CHECK(exact.std_error == 0.0);
  CHECK(exact.evaluated > 0);
  CHECK(exact.mean < 1.0);  // flat disk value 0.348... drags the average down
  CHECK(std::fabs(exact.mean - 1.0) < 0.05);

  MeanPlan plan;
  plan.mode = MeanPlan::Mode::monte_carlo;
  plan.samples = 200000;
  plan.seed = 42;
  MeanResult mc = mean_nu(cfg, t, plan);
  CHECK_FALSE(mc.exact);
  CHECK(mc.std_error > 0.0);
  CHECK(std::fabs(mc.mean - exact.mean) <= 3.0 * mc.std_error);

  MeanResult mc2 = mean_nu(cfg, t, plan);
  CHECK(mc2.mean == mc.mean);  // same seed, same estimate
}

TEST_CASE("measure system wires shape differences into the weight", "[weight]") {
  const auto& t = shared_table();
  WeightParams params;
  params.N = 997;
  params.epsilon = 0.125;
  WeightConfig cfg = make_weight_config(params, t);
  std::vector<GaussianInt> shape = {g(0, 0), g(1, 0), g(0, 1)};
  MeasureSystem sys = measure_system_from_nu(shape, cfg, t);
  CHECK(sys.edges.size() == 3);
  CHECK(sys.edges[0].omitted == 0);
  CHECK(sys.edges[0].members == std::vector<int>{1, 2});
  CHECK(sys.edges[0].coeffs[0] == g(1, 0));
  CHECK(sys.edges[0].coeffs[1] == g(0, 1));

  std::mt19937_64 rng(777);
  std::uniform_int_distribution<long long> dist(0, 996);
  for (int k = 0; k < 50; ++k) {
    GaussianInt x1{dist(rng), dist(rng)};
    GaussianInt x2{dist(rng), dist(rng)};
    double via_edge = sys.edge_value(0, {x1, x2});
    double direct = nu(x1 + g(0, 1) * x2, cfg, t);
    CHECK(via_edge == Catch::Approx(direct).epsilon(1e-14));
    double via_edge1 = sys.edge_value(1, {x1, x2});
    double direct1 = nu(-x1 + g(-1, 1) * x2, cfg, t);
    CHECK(via_edge1 == Catch::Approx(direct1).epsilon(1e-14));
  }
  CHECK_THROWS_AS(sys.edge_value(0, {g(1, 0)}), std::invalid_argument);
  CHECK_THROWS_AS(measure_system_from_nu({g(0, 0), g(0, 0)}, cfg, t), std::invalid_argument);
}
