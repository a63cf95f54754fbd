#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "ulab/errors.hpp"
#include "ulab/patterns.hpp"

using namespace ulab::patterns;
using ulab::sequences::BracketPattern;
using ulab::sequences::Irrational;
using ulab::sequences::PatternKind;

TEST_SUITE_BEGIN("patterns");

TEST_CASE("density profile examples") {
  const auto full = IntegerSet::full(1000);
  const uint64_t sizes[] = {10, 100, 500};
  for (const auto& p : upper_density_profile(full, sizes)) CHECK(p.max_density == 1.0);

  const auto evens = IntegerSet::evens(1000);
  const uint64_t hundred[] = {100};
  CHECK(upper_density_profile(evens, hundred)[0].max_density == doctest::Approx(0.5));

  // First half full: a quarter-length window fits inside entirely.
  std::vector<uint64_t> members;
  for (uint64_t v = 1; v <= 500; ++v) members.push_back(v);
  const auto half = IntegerSet::from_members(1000, members, "halffull");
  const uint64_t quarter[] = {250};
  CHECK(upper_density_profile(half, quarter)[0].max_density == 1.0);
}

TEST_CASE("find_pattern on the full set returns the least shifted prime") {
  const auto tables = ulab::primes::build_tables(1000);
  const auto set = IntegerSet::full(1000);
  const auto pattern = BracketPattern::make(PatternKind::FloorScaled, 2, Irrational::sqrt_of(2));
  const auto w = find_pattern(set, pattern, -1, 100, tables);
  REQUIRE(w.has_value());
  CHECK(w->n == 1);  // p = 2, n = p - 1
  CHECK(w->p == 2);
  CHECK(w->m == 1);
  REQUIRE(w->positions.size() == 3);
  CHECK(w->positions[0] == 1);
  CHECK(w->positions[1] == 2);  // 1 + [sqrt2]
  CHECK(w->positions[2] == 3);  // 1 + [2 sqrt2]
}

TEST_CASE("find_pattern on evens needs an even bracket value") {
  const auto tables = ulab::primes::build_tables(10000);
  const auto set = IntegerSet::evens(10000);
  const auto pattern = BracketPattern::make(PatternKind::ScaledFloor, 1, Irrational::sqrt_of(2));
  const auto w = find_pattern(set, pattern, -1, 1000, tables);
  REQUIRE(w.has_value());
  CHECK(w->m % 2 == 0);
  CHECK(w->positions[1] % 2 == 0);
  // the witness really is the least: n = 1 gives [sqrt2] = 1, odd shift, so n >= 2
  CHECK(w->n > 1);
}

TEST_CASE("census and find agree about emptiness; census is monotone") {
  const auto tables = ulab::primes::build_tables(4000);
  const auto pattern = BracketPattern::make(PatternKind::FloorScaled, 3, Irrational::sqrt_of(2));
  const auto sparse = IntegerSet::bernoulli(2000, 0.05, 42);
  const auto rows = pattern_census(sparse, pattern, -1, 200, tables);
  const auto witness = find_pattern(sparse, pattern, -1, 200, tables);
  uint64_t total = 0;
  for (const auto& r : rows) total += r.count;
  CHECK((total == 0) == !witness.has_value());

  // Monotonicity: enlarging the set never decreases counts.
  auto bigger = sparse;
  for (uint64_t v = 1; v <= 2000; v += 3) bigger.insert(v);
  const auto rows2 = pattern_census(bigger, pattern, -1, 200, tables);
  REQUIRE(rows.size() == rows2.size());
  for (size_t i = 0; i < rows.size(); ++i) CHECK(rows2[i].count >= rows[i].count);
}

TEST_CASE("census on the full set counts N - a_k(n)") {
  const auto tables = ulab::primes::build_tables(1000);
  const auto set = IntegerSet::full(500);
  const auto pattern = BracketPattern::make(PatternKind::FloorScaled, 2, Irrational::sqrt_of(2));
  const auto rows = pattern_census(set, pattern, -1, 50, tables);
  for (const auto& r : rows) {
    const auto exps = bracket_exponents(pattern, r.n);
    CHECK(r.count == 500 - static_cast<uint64_t>(exps.back()));
  }
  const auto empty = IntegerSet::bernoulli(500, 1e-9, 1);  // almost surely empty
  for (const auto& r : pattern_census(empty, pattern, -1, 50, tables)) CHECK(r.count == 0);
}

TEST_CASE("counterexample scan: exact measures with hand-checked leading terms") {
  const auto rep = counterexample_scan(16);
  REQUIRE(rep.rows.size() == 16);
  // n=1: shift 1/(2 sqrt2) = 0.3536, farther than 1/4 from 0 -> empty.
  CHECK(rep.rows[0].bracket == 1);
  CHECK(rep.rows[0].measure == 0.0);
  // n=2: [2 sqrt2] = 2, shift 0.7071, distance 0.2929 > 1/4 -> empty.
  CHECK(rep.rows[1].bracket == 2);
  CHECK(rep.rows[1].measure == 0.0);
  // n=3: [3 sqrt2] = 4, shift 4c = 1.41421 -> 0.41421 -> empty.
  CHECK(rep.rows[2].measure == 0.0);
  // n=4: [4 sqrt2] = 5, shift 5c = 1.76777 -> 0.76777, distance 0.23223 < 1/4:
  // overlap = 1/4 - 0.23223 = 0.01777.
  CHECK(rep.rows[3].measure == doctest::Approx(0.017766952966368953).epsilon(1e-12));
  // n=6: [6 sqrt2] = 8, shift 8c -> 0.82843, distance 0.17157, overlap 0.07843.
  CHECK(rep.rows[5].measure == doctest::Approx(0.078427124746190348).epsilon(1e-12));
  // n=5: [5 sqrt2] = 7, shift 7c = 2.47487 -> 0.47487 -> empty.
  CHECK(rep.rows[4].measure == 0.0);
}

TEST_CASE("counterexample scan parity bookkeeping matches the rows") {
  const auto rep = counterexample_scan(2000);
  uint64_t odd = 0, even = 0;
  for (const auto& row : rep.rows) {
    if (row.measure > 0.0) (row.n % 2 ? odd : even) += 1;
  }
  CHECK(rep.odd_positive.size() == odd);
  CHECK(rep.even_positive == even);
  CHECK(even > 100);
  // Narrower arcs kill every odd overlap: with A = (-1/16, 1/16) an odd shift
  // sits at distance >= 1/2 - 1/(2 sqrt2) = 0.1464 > 1/8 from zero.
  const auto narrow = counterexample_scan(2000, 0.0625);
  CHECK(narrow.odd_positive.empty());
  CHECK(narrow.even_positive > 100);
}

TEST_CASE("orbit membership generator matches direct evaluation") {
  const auto alpha = Irrational::named("inv2sqrt2");
  const auto A = ulab::systems::CircleSet::interval(-0.125, 0.125);
  const auto set = IntegerSet::orbit_hits(500, alpha, A);
  for (uint64_t j = 1; j <= 500; ++j)
    CHECK(set.contains(j) == A.contains(alpha.frac_bits(j)));
  CHECK(set.count() > 50);
}

TEST_CASE("set files round-trip") {
  const auto set = IntegerSet::bernoulli(300, 0.4, 7);
  const auto path = (std::filesystem::temp_directory_path() / "ulab_set_test.txt").string();
  set.save(path);
  const auto loaded = IntegerSet::load(path);
  CHECK(loaded.N() == set.N());
  for (uint64_t v = 1; v <= 300; ++v) CHECK(loaded.contains(v) == set.contains(v));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(IntegerSet::load("/nonexistent/set.txt"), ulab::io_error);
}

TEST_SUITE_END();
