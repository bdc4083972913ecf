#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "constel/decompose.hpp"

using namespace constel;

namespace {
EdgeFunction dense_from(std::vector<double> v, long long rows, long long cols) {
  return EdgeFunction::dense({0, 1}, {rows, cols}, std::move(v));
}

EdgeFunction iid_heavy_nu(long long side, unsigned long long seed, double spike) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(side * side));
  for (auto& t : v) t = u(rng) < 1.0 / spike ? spike : 0.0;
  return dense_from(std::move(v), side, side);
}

double table_mean(const EdgeFunction& f) {
  double acc = 0.0;
  for (double v : f.values) acc += v;
  return acc / static_cast<double>(f.values.size());
}
}  // namespace

TEST_CASE("partitions: validation, join, refinement", "[partition]") {
  Partition triv = Partition::trivial({3, 4});
  Partition disc = Partition::discrete({3, 4});
  CHECK_NOTHROW(validate_partition(triv));
  CHECK_NOTHROW(validate_partition(disc));
  CHECK(triv.atom_count == 1);
  CHECK(disc.atom_count == 12);

  Partition short_labels = triv;
  short_labels.atom_of.pop_back();
  CHECK_THROWS_AS(validate_partition(short_labels), std::invalid_argument);
  Partition out_of_range = triv;
  out_of_range.atom_of[3] = 5;
  CHECK_THROWS_AS(validate_partition(out_of_range), std::invalid_argument);
  Partition gap = triv;
  gap.atom_count = 3;
  for (std::size_t i = 0; i < gap.atom_of.size(); ++i) gap.atom_of[i] = i % 2 ? 2 : 0;
  CHECK_THROWS_AS(validate_partition(gap), std::invalid_argument);

  Partition rows = triv;
  rows.atom_count = 3;
  Partition cols = triv;
  cols.atom_count = 2;
  for (long long r = 0; r < 3; ++r)
    for (long long c = 0; c < 4; ++c) {
      rows.atom_of[static_cast<std::size_t>(r * 4 + c)] = static_cast<int>(r);
      cols.atom_of[static_cast<std::size_t>(r * 4 + c)] = static_cast<int>(c % 2);
    }
  Partition joined = join_partitions(rows, cols);
  CHECK(joined.atom_count == 6);
  // Every atom of the join sits inside one atom of each argument.
  for (std::size_t i = 0; i < joined.atom_of.size(); ++i)
    for (std::size_t k = 0; k < joined.atom_of.size(); ++k)
      if (joined.atom_of[i] == joined.atom_of[k]) {
        CHECK(rows.atom_of[i] == rows.atom_of[k]);
        CHECK(cols.atom_of[i] == cols.atom_of[k]);
      }
  Partition rejoin = join_partitions(triv, rows);
  CHECK(rejoin.atom_count == rows.atom_count);

  Partition other = Partition::trivial({4, 3});
  CHECK_THROWS_AS(join_partitions(triv, other), std::invalid_argument);
}

TEST_CASE("conditional expectation: projections and Pythagoras", "[partition]") {
  std::mt19937_64 rng(8841);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(24);
  for (auto& t : v) t = u(rng);
  EdgeFunction f = dense_from(v, 4, 6);

  Partition triv = Partition::trivial({4, 6});
  EdgeFunction ef = cond_exp(f, triv);
  double mean = table_mean(f);
  for (double t : ef.values) CHECK(t == Catch::Approx(mean).margin(1e-13));

  Partition disc = Partition::discrete({4, 6});
  EdgeFunction id = cond_exp(f, disc);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(id.values[i] == f.values[i]);

  Partition cols = triv;
  cols.atom_count = 3;
  for (long long r = 0; r < 4; ++r)
    for (long long c = 0; c < 6; ++c)
      cols.atom_of[static_cast<std::size_t>(r * 6 + c)] = static_cast<int>(c % 3);
  EdgeFunction proj = cond_exp(f, cols);
  // Tower property: the overall mean is preserved.
  CHECK(table_mean(proj) == Catch::Approx(mean).margin(1e-12));
  // Idempotent.
  EdgeFunction twice = cond_exp(proj, cols);
  for (std::size_t i = 0; i < v.size(); ++i)
    CHECK(twice.values[i] == Catch::Approx(proj.values[i]).margin(1e-12));
  // Linear.
  std::vector<double> w(24);
  for (auto& t : w) t = u(rng);
  EdgeFunction g = dense_from(w, 4, 6);
  std::vector<double> combo(24);
  for (std::size_t i = 0; i < 24; ++i) combo[i] = 2.0 * v[i] - 0.5 * w[i];
  EdgeFunction pc = cond_exp(dense_from(combo, 4, 6), cols);
  EdgeFunction pg = cond_exp(g, cols);
  for (std::size_t i = 0; i < 24; ++i)
    CHECK(pc.values[i] == Catch::Approx(2.0 * proj.values[i] - 0.5 * pg.values[i]).margin(1e-12));
  // Pythagoras.
  double sq = 0.0, proj_sq = 0.0, res_sq = 0.0;
  for (std::size_t i = 0; i < 24; ++i) {
    sq += v[i] * v[i];
    proj_sq += proj.values[i] * proj.values[i];
    double r = v[i] - proj.values[i];
    res_sq += r * r;
  }
  CHECK(sq == Catch::Approx(proj_sq + res_sq).margin(1e-9));

  CHECK_THROWS_AS(cond_exp(f, Partition::trivial({6, 4})), std::invalid_argument);
}

TEST_CASE("level-set partition of a bounded function", "[partition]") {
  EdgeFunction flat = EdgeFunction::constant({0, 1}, {5, 5}, 0.37);
  EdgeFunction ones = EdgeFunction::constant({0, 1}, {5, 5}, 1.0);
  SigmaAlgebra single = sigma_from_function(flat, 0.1, 0.05, ones);
  CHECK(single.partition.atom_count == 1);
  CHECK_NOTHROW(validate_partition(single.partition));

  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(400);
  for (auto& t : v) t = u(rng);
  EdgeFunction g = dense_from(v, 20, 20);
  EdgeFunction w = EdgeFunction::constant({0, 1}, {20, 20}, 1.0);
  const double eps = 0.1, sg = 0.05;
  SigmaAlgebra sa = sigma_from_function(g, eps, sg, w);
  CHECK_NOTHROW(validate_partition(sa.partition));
  CHECK(sa.alpha >= 0.0);
  CHECK(sa.alpha < 1.0);

  // Oscillation within each atom is below the window width.
  std::vector<double> lo(static_cast<std::size_t>(sa.partition.atom_count), 1e300);
  std::vector<double> hi(static_cast<std::size_t>(sa.partition.atom_count), -1e300);
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t a = static_cast<std::size_t>(sa.partition.atom_of[i]);
    lo[a] = std::min(lo[a], v[i]);
    hi[a] = std::max(hi[a], v[i]);
  }
  for (int a = 0; a < sa.partition.atom_count; ++a)
    CHECK(hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)] <= eps);

  // Atom count bounded by the value range over the window width, plus two.
  double vmin = *std::min_element(v.begin(), v.end());
  double vmax = *std::max_element(v.begin(), v.end());
  CHECK(sa.partition.atom_count <= static_cast<int>((vmax - vmin) / eps) + 2);

  // The chosen offset beats the recorded averaged bound.
  CHECK(sa.boundary_mass <= sa.boundary_bound);
  CHECK(sa.boundary_bound == Catch::Approx(2.0 * 2.0 * sg * 2.0).margin(1e-12));

  CHECK_THROWS_AS(sigma_from_function(g, 0.0, sg, w), std::invalid_argument);
  CHECK_THROWS_AS(sigma_from_function(g, eps, 0.6, w), std::invalid_argument);
  CHECK_THROWS_AS(sigma_from_function(g, eps, sg, EdgeFunction::constant({0, 1}, {5, 5}, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("small-atom scan and the exceptional set", "[partition]") {
  Partition quad = Partition::trivial({10, 10});
  quad.atom_count = 4;
  for (long long r = 0; r < 10; ++r)
    for (long long c = 0; c < 10; ++c)
      quad.atom_of[static_cast<std::size_t>(r * 10 + c)] =
          static_cast<int>((r >= 5 ? 2 : 0) + (c >= 5 ? 1 : 0));
  EdgeFunction ones = EdgeFunction::constant({0, 1}, {10, 10}, 1.0);

  // Balanced atoms with mass 0.5 survive a threshold of 0.1.
  SmallAtomsReport none = find_small_atoms(quad, ones, 0.01);
  CHECK(none.omega_atoms.empty());
  CHECK(none.omega_mass == 0.0);
  for (double m : none.atom_mass) CHECK(m == Catch::Approx(0.5).margin(1e-12));
  for (double d : none.deviation) CHECK(d == Catch::Approx(0.0).margin(1e-12));

  // A threshold above every atom mass sweeps everything into the union.
  SmallAtomsReport all = find_small_atoms(quad, ones, 0.49);
  CHECK(all.omega_atoms.size() == 4);
  CHECK(all.omega_mass == Catch::Approx(2.0).margin(1e-12));
  CHECK(all.omega_mass <= all.kappa_bound);
  for (char c : all.omega) CHECK(c == 1);

  // One heavy atom survives while the light ones are collected.
  std::vector<double> spike(100, 1.0);
  for (long long r = 0; r < 5; ++r)
    for (long long c = 0; c < 5; ++c) spike[static_cast<std::size_t>(r * 10 + c)] = 9.0;
  EdgeFunction heavy = dense_from(spike, 10, 10);
  SmallAtomsReport mixed = find_small_atoms(quad, heavy, 0.36);  // threshold 0.6
  CHECK(mixed.omega_atoms.size() == 3);
  CHECK(mixed.atom_mass[0] == Catch::Approx(2.5).margin(1e-12));
  CHECK(mixed.deviation[0] == Catch::Approx(8.0).margin(1e-12));
  CHECK(mixed.omega_mass == Catch::Approx(1.5).margin(1e-12));
}

TEST_CASE("retained structural energy", "[partition]") {
  std::mt19937_64 rng(77417);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(64);
  for (auto& t : v) t = u(rng);
  EdgeFunction f = dense_from(v, 8, 8);
  Partition triv = Partition::trivial({8, 8});
  double mean = table_mean(f);

  std::vector<char> empty(64, 0);
  CHECK(energy(f, triv, empty) == Catch::Approx(mean * mean).margin(1e-12));
  std::vector<char> full(64, 1);
  CHECK(energy(f, triv, full) == 0.0);

  Partition halves = triv;
  halves.atom_count = 2;
  for (long long r = 0; r < 8; ++r)
    for (long long c = 0; c < 8; ++c)
      halves.atom_of[static_cast<std::size_t>(r * 8 + c)] = r < 4 ? 0 : 1;
  // Refinement with no exceptional set cannot lose energy.
  CHECK(energy(f, halves, empty) >= energy(f, triv, empty) - 1e-12);

  // The exceptional set must be a union of atoms.
  std::vector<char> ragged(64, 0);
  ragged[0] = 1;
  CHECK_THROWS_AS(energy(f, halves, ragged), std::invalid_argument);
  std::vector<char> top(64, 0);
  for (std::size_t i = 0; i < 32; ++i) top[i] = 1;
  CHECK_NOTHROW(energy(f, halves, top));

  // Pointwise domination carries to the energies.
  std::vector<double> cap(64);
  for (std::size_t i = 0; i < 64; ++i) cap[i] = v[i] + 0.3;
  CHECK(energy(f, halves, top) <= energy(dense_from(cap, 8, 8), halves, top) + 1e-12);
}

TEST_CASE("refinement tower on a flat input stops immediately", "[partition]") {
  EdgeFunction one = EdgeFunction::constant({0, 1}, {25, 25}, 1.0);
  TowerState st = tower(one, one, 0.1, 0.01);
  CHECK(st.terminated);
  CHECK(st.K == 0);
  CHECK(st.B.atom_count == 1);
  CHECK(st.final_box_norm == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(st.box_norms.size() == 1);
  REQUIRE(st.energies.size() == 1);
  CHECK(st.energies[0] == Catch::Approx(1.0).margin(1e-12));
  CHECK(st.generators.empty());
  for (char c : st.omega) CHECK(c == 0);
}

TEST_CASE("refinement tower accepts a spiked random majorant without refining", "[partition]") {
  const long long side = 50;
  const double spike = std::log(50.0);
  EdgeFunction nu = iid_heavy_nu(side, 101, spike);
  std::mt19937_64 rng(101 + 7);
  std::uniform_int_distribution<int> bit(0, 1);
  std::vector<double> f(nu.values);
  for (auto& t : f) t *= bit(rng);
  TowerState st = tower(dense_from(std::move(f), side, side), nu, 0.1, 1e-3);
  CHECK(st.terminated);
  CHECK(st.K == 0);
  CHECK(st.K <= static_cast<int>(std::ceil(8.0 / 0.1)));
  CHECK(st.threshold == Catch::Approx(std::pow(0.1, 1.0 / 8.0)).margin(1e-12));
  CHECK(st.final_box_norm <= st.threshold);
  CHECK(st.final_box_norm == Catch::Approx(0.5987).margin(5e-3));
}

TEST_CASE("refinement tower captures half-plane structure in one pass", "[partition]") {
  const long long side = 50;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.8, 1.2);
  std::vector<double> nu(static_cast<std::size_t>(side * side));
  for (auto& t : nu) t = u(rng);
  std::vector<double> f(nu);
  for (long long x = side / 2; x < side; ++x)
    for (long long y = 0; y < side; ++y) f[static_cast<std::size_t>(x * side + y)] = 0.0;
  EdgeFunction fe = dense_from(f, side, side);
  EdgeFunction ne = dense_from(nu, side, side);

  TowerState st = tower(fe, ne, 0.002, 0.005);
  CHECK(st.terminated);
  CHECK(st.K == 1);
  REQUIRE(st.box_norms.size() == 2);
  CHECK(st.box_norms[0] > st.threshold);
  CHECK(st.box_norms[0] == Catch::Approx(0.5009).margin(5e-3));
  CHECK(st.final_box_norm <= st.threshold);
  CHECK(st.final_box_norm < 0.06);
  CHECK(st.B.atom_count >= 2);
  CHECK(st.B.atom_count <= 60);
  REQUIRE(st.omega_masses.size() == 1);
  CHECK(st.omega_masses[0] <= 0.35);
  REQUIRE(st.energies.size() == 2);
  CHECK(st.energies[1] >= st.energies[0] + 0.1);
  CHECK(st.generators.size() == 1);
  CHECK(st.atom_counts.size() == 1);
  // The exceptional set is measurable in the final partition.
  CHECK_NOTHROW(energy(fe, st.B, st.omega));

  // A zero-iteration cap on the same input reports non-termination.
  TowerState capped = tower(fe, ne, 0.002, 0.005, 0);
  CHECK_FALSE(capped.terminated);
  CHECK(capped.K == 0);
  CHECK(capped.B.atom_count == 1);
  CHECK(capped.final_box_norm > capped.threshold);
}

TEST_CASE("refinement tower rejects bad inputs", "[partition]") {
  EdgeFunction one = EdgeFunction::constant({0, 1}, {5, 5}, 1.0);
  EdgeFunction two = EdgeFunction::constant({0, 1}, {5, 5}, 2.0);
  EdgeFunction neg = EdgeFunction::constant({0, 1}, {5, 5}, -0.5);
  CHECK_THROWS_AS(tower(two, one, 0.1, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(tower(neg, one, 0.1, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(tower(one, one, 1.5, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(tower(one, one, 0.1, 0.7), std::invalid_argument);
  CHECK_THROWS_AS(tower(one, EdgeFunction::constant({0, 1}, {6, 5}, 1.0), 0.1, 0.01),
                  std::invalid_argument);
}

TEST_CASE("uniform-distribution check for dual-function products", "[partition]") {
  EdgeFunction ones = EdgeFunction::constant({0, 1}, {12, 12}, 1.0);
  std::vector<EdgeFunction> gens = {EdgeFunction::constant({0, 1}, {12, 12}, 1.5),
                                    EdgeFunction::constant({0, 1}, {12, 12}, -0.8)};
  UdpReport flat = udp_test(ones, gens);
  CHECK(flat.value == 0.0);
  CHECK(flat.K == 2);

  std::vector<EdgeFunction> escape = {EdgeFunction::constant({0, 1}, {12, 12}, 3.1)};
  CHECK_THROWS_AS(udp_test(ones, escape), std::invalid_argument);

  // Correlation shrinks as the domain grows, for a fixed construction.
  std::vector<double> trend;
  for (long long s : {20LL, 40LL, 80LL}) {
    double ln = std::log(static_cast<double>(s * s));
    EdgeFunction nu = iid_heavy_nu(s, 5000ULL + static_cast<unsigned long long>(s), ln);
    std::mt19937_64 rng(5ULL * 77 + static_cast<unsigned long long>(s));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<EdgeFunction> gg;
    for (int k = 0; k < 3; ++k) {
      std::vector<double> g(nu.values.size());
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = (nu.values[i] + 1.0) * u(rng);
      gg.push_back(dense_from(std::move(g), s, s));
    }
    EnumerationPlan plan;
    plan.budget = 3e8;
    trend.push_back(udp_test(nu, gg, -1, false, plan).value);
  }
  REQUIRE(trend.size() == 3);
  CHECK(trend[0] > trend[1]);
  CHECK(trend[1] > trend[2]);

  // The dual of the shifted majorant stays bounded; the sup is reported.
  EdgeFunction nu32 = iid_heavy_nu(32, 909, std::log(1024.0));
  UdpReport with_bound = udp_test(nu32, {}, -1, true);
  CHECK(std::isfinite(with_bound.dual_nu_bound));
  CHECK(with_bound.dual_nu_bound > 0.0);
}
