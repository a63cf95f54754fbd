#include <doctest.h>

#include <cmath>

#include "ulab/errors.hpp"
#include "ulab/sequences.hpp"

using namespace ulab::sequences;

TEST_SUITE_BEGIN("sequences");

TEST_CASE("frac oracle values") {
  const auto sqrt2 = Irrational::sqrt_of(2);
  CHECK(sqrt2.frac(3) == doctest::Approx(0.242640687119285).epsilon(1e-14));
  CHECK(sqrt2.frac(0) == 0.0);
  const auto phi = Irrational::golden();
  CHECK(phi.frac(1) == doctest::Approx(0.6180339887498949).epsilon(1e-14));
  CHECK(phi.value() == doctest::Approx(1.6180339887498949).epsilon(1e-14));
}

TEST_CASE("floor + frac reassembles n*alpha") {
  const auto sqrt3 = Irrational::sqrt_of(3);
  for (uint64_t n : {1ull, 17ull, 1234ull, 99991ull}) {
    const long double direct = static_cast<long double>(n) * std::sqrt(3.0L);
    const long double rebuilt =
        static_cast<long double>(sqrt3.floor_times(n)) + static_cast<long double>(sqrt3.frac(n));
    CHECK(std::abs(direct - rebuilt) < 1e-9L);
  }
}

TEST_CASE("precision budget is enforced") {
  const auto sqrt2 = Irrational::sqrt_of(2);
  CHECK_THROWS_AS(sqrt2.frac_bits(Irrational::kMaxMultiplier + 1), ulab::precision_error);
  CHECK_NOTHROW(sqrt2.frac_bits(Irrational::kMaxMultiplier));
}

TEST_CASE("named labels and the scaled constructor") {
  CHECK(Irrational::named("inv2sqrt2").value() ==
        doctest::Approx(0.3535533905932738).epsilon(1e-14));
  CHECK(Irrational::named("sqrt5").value() == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
  CHECK_THROWS_AS(Irrational::named("pi"), ulab::invalid_argument);
  CHECK_THROWS_AS(Irrational::sqrt_of(4), ulab::invalid_argument);
  CHECK_THROWS_AS(Irrational::sqrt_of(1), ulab::invalid_argument);
}

TEST_CASE("bracket exponents per kind") {
  const auto sqrt2 = Irrational::sqrt_of(2);
  const auto fs = BracketPattern::make(PatternKind::FloorScaled, 3, sqrt2);
  CHECK(bracket_exponents(fs, 1) == std::vector<int64_t>{1, 2, 4});
  const auto sf = BracketPattern::make(PatternKind::ScaledFloor, 3, sqrt2);
  CHECK(bracket_exponents(sf, 1) == std::vector<int64_t>{1, 2, 3});
  const auto lin = BracketPattern::linear(2);
  CHECK(bracket_exponents(lin, 7) == std::vector<int64_t>{7, 14});
  CHECK_THROWS_AS(BracketPattern::make(PatternKind::FloorScaled, 0, sqrt2),
                  ulab::invalid_argument);
}

TEST_CASE("closest integer correction") {
  const auto sqrt2 = Irrational::sqrt_of(2);
  CHECK(closest_integer_correction(sqrt2, 1, 1) == 0);  // {sqrt2} = 0.414
  CHECK(closest_integer_correction(sqrt2, 1, 2) == 1);  // {2 sqrt2} = 0.828
  CHECK(closest_integer_correction(sqrt2, 2, 2) == 2);  // 2*0.828 = 1.657
  for (uint64_t h = 1; h <= 1000; ++h) {
    const int64_t d = closest_integer_correction(sqrt2, 1, h);
    CHECK(d >= 0);
    CHECK(d <= 1);
  }
}

TEST_CASE("bracket differences match hand values") {
  const auto sqrt2 = Irrational::sqrt_of(2);
  const auto fs = BracketPattern::make(PatternKind::FloorScaled, 1, sqrt2);
  CHECK(bracket_difference(fs, 3, 3, 1) == 4);   // [6 sqrt2] - [3 sqrt2] = 8 - 4
  CHECK(bracket_difference(fs, 10, 3, 1) == 4);  // [13 sqrt2] - [10 sqrt2] = 18 - 14
}

TEST_CASE("expected difference: the step is v*floor(h*alpha) + D_v(h)") {
  const auto sqrt2 = Irrational::sqrt_of(2);
  const auto fs = BracketPattern::make(PatternKind::FloorScaled, 2, sqrt2);
  // h = 7: frac(7 sqrt2) = 0.8995, so D_2(7) = nearest(1.799) = 2 and the
  // expected step for v = 2 is 2*[7 sqrt2] + 2 = 20. Witness at n = 10:
  // frac(10 sqrt2) = 0.142 and frac(17 sqrt2) = 0.042, both in cell (0, 1/6),
  // and [34 sqrt2] - [20 sqrt2] = 48 - 28 = 20.
  CHECK(expected_bracket_difference(fs, 2, 7) == 20);
  CHECK(bracket_difference(fs, 10, 7, 2) == 20);
  // ScaledFloor: v * ([h alpha] + D_1(h)).
  const auto sf = BracketPattern::make(PatternKind::ScaledFloor, 2, sqrt2);
  CHECK(expected_bracket_difference(sf, 2, 2) == 2 * (2 + 1));
}

TEST_CASE("interval weights enforce the partition rule") {
  CHECK_THROWS_AS(IntervalWeight::custom(1, 1, 0.0, 0.9), ulab::invalid_argument);
  CHECK_THROWS_AS(IntervalWeight::cell(1, 3), ulab::invalid_argument);
  CHECK_THROWS_AS(IntervalWeight::cell(1, 0), ulab::invalid_argument);
  const auto w = IntervalWeight::cell(2, 4);  // (3/6, 4/6)
  CHECK(w.lo() == doctest::Approx(0.5));
  CHECK(w.hi() == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
  CHECK(w.contains(ulab::fixed128::from_double(0.55)));
  CHECK(!w.contains(ulab::fixed128::from_double(0.45)));
  // Half-open: the left endpoint is in, the right is out.
  CHECK(w.contains(ulab::fixed128::rational_point(1, 2)));
  CHECK(!w.contains(ulab::fixed128::rational_point(4, 6)));
  CHECK_NOTHROW(IntervalWeight::custom(1, 1, 0.1, 0.3));
  CHECK_NOTHROW(IntervalWeight::custom(3, 2, 1.0 / 24.0, 2.0 / 24.0));
}

TEST_CASE("identity verifier finds no violations on bracket patterns") {
  const auto sqrt3 = Irrational::sqrt_of(3);
  for (const auto kind : {PatternKind::FloorScaled, PatternKind::ScaledFloor}) {
    const auto pattern = BracketPattern::make(kind, 2, sqrt3);
    for (uint64_t cell = 1; cell <= 6; ++cell) {
      const auto rep =
          identity_verifier(pattern, IntervalWeight::cell(2, cell), 2000, 200, 50);
      CHECK(rep.ok());
      CHECK(rep.pairs_checked > 0);
    }
  }
}

TEST_CASE("identity verifier catches a doctored expectation") {
  // Sanity check that the verifier is actually looking: a pattern evaluated
  // against the wrong cells would report violations. Verified here by running
  // a support that spans a partition point boundary via the coarse option on
  // FloorScaled k=2, where cell size 1/2 admits non-constant steps.
  const auto sqrt2 = Irrational::sqrt_of(2);
  const auto fs = BracketPattern::make(PatternKind::FloorScaled, 2, sqrt2);
  const auto coarse = IntervalWeight::custom(2, 1, 0.0, 0.5, 2);
  const auto rep = identity_verifier(fs, coarse, 2000, 200, 0);
  CHECK(!rep.ok());
}

TEST_CASE("level_set matches a brute-force oracle") {
  const auto sqrt2 = Irrational::sqrt_of(2);
  // oracle: frac(m sqrt2) < 0.5 for m = 1..5 -> {1, 3, 5}
  std::vector<uint64_t> oracle;
  for (uint64_t m = 1; m <= 5; ++m)
    if (std::fmod(static_cast<double>(m) * std::sqrt(2.0), 1.0) < 0.5) oracle.push_back(m);
  CHECK(level_set(sqrt2, 0.5, 5) == oracle);
  CHECK(oracle == std::vector<uint64_t>{1, 3, 5});
  CHECK(level_set(sqrt2, 0.1, 5) == std::vector<uint64_t>{5});
  CHECK_THROWS_AS(level_set(sqrt2, 1.0, 5), ulab::invalid_argument);
}

TEST_CASE("equidistribution sanity at N = 1e5") {
  const double targets[] = {0.1, 0.25, 0.5};
  for (const auto& alpha :
       {Irrational::sqrt_of(2), Irrational::sqrt_of(3), Irrational::golden()}) {
    for (double t : targets) {
      const auto hits = level_set(alpha, t, 100000);
      const double density = static_cast<double>(hits.size()) / 1e5;
      CHECK(std::abs(density - t) < 0.01);
    }
  }
}

TEST_SUITE_END();
