#include <doctest.h>

#include <cmath>

#include "ulab/errors.hpp"
#include "ulab/fixed128.hpp"

using namespace ulab::fixed128;

TEST_SUITE_BEGIN("fixed128");

TEST_CASE("sqrt_fixed matches long double to the last representable bits") {
  for (uint64_t d : {2ull, 3ull, 5ull, 7ull, 10ull, 11ull, 1234567ull}) {
    const auto s = sqrt_fixed(d);
    const long double root = std::sqrt(static_cast<long double>(d));
    CHECK(s.int_part == static_cast<uint64_t>(root));
    const double frac = to_double(s.frac);
    const double want = static_cast<double>(root - std::floor(root));
    CHECK(std::abs(frac - want) < 1e-15);
  }
}

TEST_CASE("sqrt_fixed squares back to d within 2 ulps") {
  // (int + frac/2^128)^2 ~ d: check the double approximation tightly.
  for (uint64_t d : {2ull, 3ull, 5ull, 7ull}) {
    const auto s = sqrt_fixed(d);
    const long double v = static_cast<long double>(s.int_part) +
                          static_cast<long double>(to_double(s.frac));
    CHECK(std::abs(v * v - static_cast<long double>(d)) < 1e-17L * static_cast<long double>(d) * 1e3);
  }
}

TEST_CASE("mul splits n*frac into exact floor and fraction") {
  const u128 third = rational_point(1, 3);
  // 5 * (1/3): floor 1, frac 2/3 (up to the 1-ulp representation of 1/3)
  const auto r = mul(third, 5);
  CHECK(r.floor_part == 1);
  CHECK(std::abs(to_double(r.frac) - 2.0 / 3.0) < 1e-30);

  const u128 half = rational_point(1, 2);
  const auto r2 = mul(half, 7);
  CHECK(r2.floor_part == 3);
  CHECK(to_double(r2.frac) == 0.5);
}

TEST_CASE("from_double/to_double round-trips dyadics exactly") {
  for (double x : {0.0, 0.125, 0.5, 0.875, 0.999969482421875}) {
    CHECK(to_double(from_double(x)) == x);
  }
  CHECK_THROWS_AS(from_double(1.0), ulab::invalid_argument);
  CHECK_THROWS_AS(from_double(-0.25), ulab::invalid_argument);
}

TEST_CASE("grid_point is monotone and exact at dyadic grids") {
  CHECK(grid_point(0, 8) == 0);
  CHECK(to_double(grid_point(1, 8)) == 0.125);
  CHECK(to_double(grid_point(7, 8)) == 0.875);
  u128 prev = 0;
  for (uint64_t j = 1; j < 100; ++j) {
    const u128 p = grid_point(j, 100);
    CHECK(p > prev);
    prev = p;
  }
}

TEST_CASE("scale_rational divides exactly") {
  // sqrt2 / 4 = 0.35355339059327378...
  const auto s2 = sqrt_fixed(2);
  const auto v = scale_rational(s2.int_part, s2.frac, 1, 4);
  CHECK(v.int_part == 0);
  CHECK(std::abs(to_double(v.frac) - 0.35355339059327378) < 1e-15);
  // (1 + frac) * 3 / 1
  const auto w = scale_rational(1, rational_point(1, 4), 3, 1);
  CHECK(w.int_part == 3);
  CHECK(to_double(w.frac) == 0.75);
}

TEST_SUITE_END();
