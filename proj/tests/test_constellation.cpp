#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "constel/constellation.hpp"

using namespace constel;

namespace {

Shape shape_of(std::initializer_list<std::pair<long long, long long>> pts) {
  Shape s;
  for (auto [re, im] : pts) s.points.push_back({re, im});
  return s;
}

std::vector<GaussianInt> pts_of(std::initializer_list<std::pair<long long, long long>> pts) {
  return shape_of(pts).points;
}

}  // namespace

TEST_CASE("lattice spanning condition across ordered pairs", "[search]") {
  CHECK(is_fully_spanning(pts_of({{0, 0}, {1, 0}, {0, 1}, {1, 1}})));
  CHECK_FALSE(is_fully_spanning(pts_of({{0, 0}, {1, 0}, {0, 1}})));
  CHECK_FALSE(is_fully_spanning(pts_of({{0, 0}, {1, 0}})));
  CHECK(is_fully_spanning(pts_of({{0, 0}})));
  CHECK(is_fully_spanning({}));
  // The condition only involves differences, so translating everything is harmless.
  CHECK(is_fully_spanning(pts_of({{5, 3}, {6, 3}, {5, 4}, {6, 4}})));
  // Scaling every point doubles all the determinants, so the gcd leaves 1.
  CHECK_FALSE(is_fully_spanning(pts_of({{0, 0}, {2, 0}, {0, 2}, {2, 2}})));
}

TEST_CASE("normalization translates, augments, and is idempotent", "[search]") {
  Shape quad = shape_of({{0, 0}, {1, 0}, {0, 1}, {1, 1}});

  Shape n1 = normalize(shape_of({{1, 0}, {2, 0}}));
  CHECK(n1.points == quad.points);

  Shape n2 = normalize(shape_of({{0, 0}, {1, 0}, {0, 1}}));
  CHECK(n2.points == quad.points);

  Shape n3 = normalize(shape_of({{0, 0}, {3, 0}}));
  CHECK(n3.points == pts_of({{0, 0}, {3, 0}, {1, 0}, {0, 1}, {1, 1}}));

  Shape n4 = normalize(shape_of({{7, 2}}));
  CHECK(n4.points == pts_of({{0, 0}}));

  // Translation invariance: a shifted copy of {1, 2} lands on the same output.
  Shape n5 = normalize(shape_of({{4, -1}, {5, -1}}));
  CHECK(n5.points == n1.points);

  // Idempotence.
  CHECK(normalize(n1).points == n1.points);
  CHECK(normalize(n3).points == n3.points);
  CHECK(normalize(quad).points == quad.points);

  CHECK_THROWS_AS(normalize(Shape{}), std::invalid_argument);
  CHECK_THROWS_AS(normalize(shape_of({{1, 0}, {1, 0}})), std::invalid_argument);
}

TEST_CASE("symmetrization appends negations preserving order", "[search]") {
  Shape s1 = symmetrize(shape_of({{0, 0}, {1, 0}}));
  CHECK(s1.points == pts_of({{0, 0}, {1, 0}, {-1, 0}}));

  Shape s2 = symmetrize(shape_of({{1, 1}}));
  CHECK(s2.points == pts_of({{1, 1}, {-1, -1}}));

  Shape sym = shape_of({{0, 0}, {1, 0}, {-1, 0}});
  CHECK(symmetrize(sym).points == sym.points);
  CHECK(symmetrize(s2).points == s2.points);
}

TEST_CASE("prime membership classification over the table", "[search]") {
  auto table = build_table(100000);

  CHECK(is_gaussian_prime({2, 1}, table));
  CHECK_FALSE(is_gaussian_prime({3, 1}, table));  // norm 10
  CHECK(is_gaussian_prime({3, 0}, table));        // rational prime 3 mod 4
  CHECK_FALSE(is_gaussian_prime({5, 0}, table));  // splits as (2+i)(2-i)
  CHECK(is_gaussian_prime({0, -7}, table));
  CHECK(is_gaussian_prime({1, 1}, table));
  CHECK_FALSE(is_gaussian_prime({0, 0}, table));
  CHECK_FALSE(is_gaussian_prime({1, 0}, table));
  CHECK_FALSE(is_gaussian_prime({0, -1}, table));

  // Restricting away the exceptional classes keeps only the split primes.
  CHECK(is_gaussian_prime({2, 1}, table, true));
  CHECK_FALSE(is_gaussian_prime({1, 1}, table, true));
  CHECK_FALSE(is_gaussian_prime({3, 0}, table, true));

  Shape pair = shape_of({{0, 0}, {1, 0}});
  CHECK_FALSE(is_constellation({2, 1}, 1, pair, table));  // 3+i has composite norm 10
  CHECK(is_constellation({2, 1}, -1, pair, table));       // 2+i and 1+i
  Shape one = shape_of({{0, 0}});
  for (auto a : pts_of({{1, 1}, {2, 1}, {3, 0}, {0, 11}, {-3, 0}}))
    CHECK(is_constellation(a, 1, one, table));
  CHECK_FALSE(is_constellation({3, 0}, 1, one, table, true));
  CHECK_THROWS_AS(is_constellation({2, 1}, 0, pair, table), std::invalid_argument);
}

TEST_CASE("trial-division route agrees with classification", "[search]") {
  auto table = build_table(1000000);
  int primes = 0;
  for (long long re = -20; re <= 20; ++re)
    for (long long im = -20; im <= 20; ++im) {
      GaussianInt z{re, im};
      bool by_class = is_gaussian_prime(z, table);
      bool by_division = verified_prime_by_division(z, table);
      REQUIRE(by_class == by_division);
      if (by_class) ++primes;
    }
  CHECK(primes == 412);

  auto tiny = build_table(10);
  CHECK(verified_prime_by_division({7, 0}, tiny));
  CHECK_FALSE(verified_prime_by_division({0, 2}, tiny));
  CHECK_THROWS_AS(verified_prime_by_division({11, 0}, tiny), CoverageError);
}

TEST_CASE("scan finds prime pairs in scan order", "[search]") {
  auto table = build_table(1000000);
  Shape pair = shape_of({{0, 0}, {1, 0}});

  auto res = search(pair, 30, 4, table);
  CHECK(res.found.size() == 578);
  CHECK(res.finished);
  CHECK(res.candidates_scanned == 61LL * 61 * 4);
  REQUIRE_FALSE(res.found.empty());
  CHECK(res.found.front().r == 1);
  CHECK(res.found.front().a == GaussianInt{-2, -1});
  CHECK(res.found.front().points == pts_of({{-2, -1}, {-1, -1}}));

  auto ordered = [](const Constellation& x, const Constellation& y) {
    if (x.r != y.r) return x.r < y.r;
    if (x.a.re != y.a.re) return x.a.re < y.a.re;
    return x.a.im < y.a.im;
  };
  CHECK(std::is_sorted(res.found.begin(), res.found.end(), ordered));

  auto unexc = search(pair, 30, 4, table, true);
  CHECK(unexc.found.size() == 546);

  CHECK(search(pair, 30, 0, table).found.empty());
  CHECK(search(Shape{}, 30, 4, table).found.empty());

  SearchPlan capped;
  capped.max_results = 5;
  auto first5 = search(pair, 30, 4, table, capped);
  REQUIRE(first5.found.size() == 5);
  CHECK_FALSE(first5.finished);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(first5.found[i].a == res.found[i].a);
    CHECK(first5.found[i].r == res.found[i].r);
  }
}

TEST_CASE("scan resumes from a checkpoint index without loss", "[search]") {
  auto table = build_table(1000000);
  Shape pair = shape_of({{0, 0}, {1, 0}});

  auto full = search(pair, 12, 3, table);
  CHECK(full.finished);
  CHECK(full.found.size() == 98);

  SearchPlan head;
  head.max_results = 7;
  auto part1 = search(pair, 12, 3, table, head);
  CHECK_FALSE(part1.finished);
  CHECK(part1.found.size() == 7);

  SearchPlan tail;
  tail.resume_index = part1.resume_index;
  auto part2 = search(pair, 12, 3, table, tail);
  CHECK(part2.finished);
  CHECK(part1.found.size() + part2.found.size() == full.found.size());
  std::vector<Constellation> merged = part1.found;
  merged.insert(merged.end(), part2.found.begin(), part2.found.end());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    CHECK(merged[i].r == full.found[i].r);
    CHECK(merged[i].a == full.found[i].a);
    CHECK(merged[i].points == full.found[i].points);
  }

  SearchPlan marks;
  marks.checkpoint_every = 100;
  auto marked = search(pair, 12, 3, table, marks);
  CHECK(marked.candidates_scanned == 25LL * 25 * 3);
  CHECK(marked.checkpoints == marked.candidates_scanned / 100);

  SearchPlan bad;
  bad.resume_index = -1;
  CHECK_THROWS_AS(search(pair, 12, 3, table, bad), std::invalid_argument);
  CHECK_THROWS_AS(search(pair, -1, 3, table), std::invalid_argument);
  CHECK_THROWS_AS(search(shape_of({{0, 0}, {0, 0}}), 5, 1, table), std::invalid_argument);
}

TEST_CASE("scan counts are invariant under unit rotation", "[search]") {
  auto table = build_table(1000000);

  Shape pair = shape_of({{0, 0}, {1, 0}});
  Shape pair_rot = shape_of({{0, 0}, {0, 1}});
  auto r1 = search(pair, 15, 3, table);
  auto r2 = search(pair_rot, 15, 3, table);
  CHECK(r1.found.size() == 126);
  REQUIRE(r1.found.size() == r2.found.size());

  // The hits themselves correspond under rotating the base point too.
  std::vector<GaussianInt> mapped, target;
  for (auto& c : r1.found) mapped.push_back(times_i(c.a));
  for (auto& c : r2.found) target.push_back(c.a);
  auto lex = [](const GaussianInt& x, const GaussianInt& y) { return lex_less(x, y); };
  std::sort(mapped.begin(), mapped.end(), lex);
  std::sort(target.begin(), target.end(), lex);
  CHECK(mapped == target);

  Shape quad = shape_of({{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  Shape quad_rot;
  for (auto& v : quad.points) quad_rot.points.push_back(times_i(v));
  auto q1 = search(quad, 150, 2, table);
  auto q2 = search(quad_rot, 150, 2, table);
  CHECK(q1.found.size() == q2.found.size());
  CHECK(q1.found.size() >= 5);
}

TEST_CASE("four-point scan demonstration instance", "[search]") {
  auto table = build_table(1000000);
  Shape quad = shape_of({{0, 0}, {1, 0}, {0, 1}, {1, 1}});

  SearchPlan plan;
  plan.max_results = 5;
  auto res = search(quad, 150, 10, table, plan);
  REQUIRE(res.found.size() == 5);
  CHECK_FALSE(res.finished);
  CHECK(res.candidates_scanned == 108585);

  std::vector<GaussianInt> bases = pts_of({{-126, -1}, {-106, -21}, {-106, 19}, {-91, -76},
                                           {-91, 74}});
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(res.found[i].r == 2);
    CHECK(res.found[i].a == bases[i]);
  }
  CHECK(res.found[0].points ==
        pts_of({{-126, -1}, {-124, -1}, {-126, 1}, {-124, 1}}));

  // Every reported hit re-verifies along both primality routes.
  for (auto& c : res.found) {
    CHECK(is_constellation(c.a, c.r, quad, table));
    for (auto& p : c.points) CHECK(verified_prime_by_division(p, table));
  }

  // Coverage and budget guards.
  auto tiny = build_table(10);
  Shape one = shape_of({{0, 0}});
  CHECK_THROWS_AS(search(one, 15, 1, tiny), CoverageError);
  CHECK_THROWS_AS(search(one, 70000, 1, table), std::length_error);
}

TEST_CASE("density report across nested bounds", "[search]") {
  auto table = build_table(1000000);
  Shape one = shape_of({{0, 0}});

  auto rep = density_report(one, 60, 1, 120, 1, table);
  CHECK(rep.shape_size == 1);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].count == 2504);
  CHECK(rep.rows[1].count == 8416);
  CHECK(rep.rows[1].count > rep.rows[0].count);
  CHECK(rep.rows[0].volume == 121.0 * 121.0);
  CHECK(rep.rows[1].volume == 241.0 * 241.0);
  CHECK(rep.rows[0].ratio == Catch::Approx(0.7595).margin(5e-4));
  CHECK(rep.rows[1].ratio == Catch::Approx(0.7439).margin(5e-4));

  auto pair_rep = density_report(shape_of({{0, 0}, {1, 0}}), 30, 2, 60, 2, table);
  CHECK(pair_rep.shape_size == 2);
  CHECK(pair_rep.rows[0].count > 0);
  CHECK(pair_rep.rows[1].count > pair_rep.rows[0].count);

  auto empty_rep = density_report(Shape{}, 60, 1, 120, 1, table);
  CHECK(empty_rep.shape_size == 0);
  CHECK(empty_rep.rows[0].count == 0);
  CHECK(empty_rep.rows[1].count == 0);
  CHECK(empty_rep.rows[0].ratio == 0.0);
}

TEST_CASE("single-point scan matches the prime-counting rate", "[search]") {
  auto table = build_table(1000000);
  Shape one = shape_of({{0, 0}});

  auto disk_ratio = [&](long long A) {
    auto res = search(one, A, 1, table, true);
    long long disk = 0;
    for (auto& c : res.found)
      if (norm(c.a) <= A * A) ++disk;
    return static_cast<double>(disk) * std::log(static_cast<double>(A)) /
           (2.0 * static_cast<double>(A) * static_cast<double>(A));
  };

  double r120 = disk_ratio(120);
  double r200 = disk_ratio(200);
  CHECK(r120 == Catch::Approx(1.1118).margin(2e-3));
  CHECK(r200 == Catch::Approx(1.1047).margin(2e-3));
  CHECK(std::abs(r120 - 1.0) <= 0.15);
  CHECK(std::abs(r200 - 1.0) <= 0.15);
  CHECK(r200 < r120);
}
