#include <doctest.h>

#include <cmath>
#include <random>

#include "ulab/errors.hpp"
#include "ulab/systems.hpp"

using namespace ulab::systems;
using ulab::sequences::Irrational;

TEST_SUITE_BEGIN("systems");

TEST_CASE("arc normalization: wrap-around split and measure") {
  const auto A = CircleSet::interval(-0.125, 0.125);
  CHECK(A.arc_count() == 2);  // [0, 1/8) and [7/8, 1)
  CHECK(A.measure() == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(A.contains(ulab::fixed128::from_double(0.9)));
  CHECK(A.contains(0));
  CHECK(!A.contains(ulab::fixed128::from_double(0.125)));
  CHECK(!A.contains(ulab::fixed128::from_double(0.5)));

  const std::pair<double, double> arcs[] = {{0.1, 0.3}, {0.2, 0.4}, {0.4, 0.45}};
  const auto merged = CircleSet::from_arcs(arcs);
  CHECK(merged.arc_count() == 1);  // overlap and adjacency merge
  CHECK(merged.measure() == doctest::Approx(0.35).epsilon(1e-15));

  CHECK(CircleSet::full_circle().measure() == 1.0);
  CHECK_THROWS_AS(CircleSet::interval(0.2, 0.2), ulab::invalid_argument);
}

TEST_CASE("rotation preserves measure bit-for-bit") {
  const auto sys = RotationSystem::circle(Irrational::sqrt_of(2));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double lo = u(rng);
    const double len = 0.01 + 0.8 * u(rng);
    const auto A = CircleSet::interval(lo, lo + len);
    const auto steps = static_cast<int64_t>(rng() % 10000) - 5000;
    const auto B = rotate_set(sys, A, steps);
    CHECK(B.measure_bits() == A.measure_bits());
  }
}

TEST_CASE("rotate_set examples") {
  const auto sys = RotationSystem::circle(Irrational::sqrt_of(2));
  const auto A = CircleSet::interval(0.0, 0.25);
  const auto same = rotate_set(sys, A, 0);
  CHECK(same.measure_bits() == A.measure_bits());
  CHECK(same.contains(ulab::fixed128::from_double(0.1)));

  // One step back: A - sqrt2 = A + (1 - frac(sqrt2)) = [0.5857.., 0.8357..)
  const auto moved = rotate_set(sys, A, 1);
  const auto arcs = moved.arcs_double();
  REQUIRE(arcs.size() == 1);
  CHECK(arcs[0].first == doctest::Approx(0.5857864376269049).epsilon(1e-14));
  CHECK(arcs[0].second == doctest::Approx(0.8357864376269049).epsilon(1e-14));
}

TEST_CASE("intersection measures: disjoint, nested, shifted") {
  const auto A = CircleSet::interval(0.0, 0.25);
  const CircleSet* one[] = {&A};
  CHECK(CircleSet::intersection_measure(one) == doctest::Approx(0.25).epsilon(1e-15));

  const auto B = A.translated(ulab::fixed128::from_double(0.5));
  const CircleSet* ab[] = {&A, &B};
  CHECK(CircleSet::intersection_measure(ab) == 0.0);

  const auto C = CircleSet::interval(0.0, 0.3);
  const auto D = C.translated(ulab::fixed128::from_double(0.1));
  const CircleSet* cd[] = {&C, &D};
  CHECK(CircleSet::intersection_measure(cd) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("exact rotation-overlap parity: the first few bracket steps of sqrt2") {
  // T x = x + 1/(2 sqrt2), A = (-1/8, 1/8). Overlap of A with A - m c is
  // positive exactly when the circle distance of m c from 0 is below 1/4.
  // Independent double-precision oracle for the first few n.
  const auto sqrt2 = Irrational::sqrt_of(2);
  const auto c = Irrational::named("inv2sqrt2");
  const auto sys = RotationSystem::circle(c);
  const auto A = CircleSet::interval(-0.125, 0.125);
  for (uint64_t n = 1; n <= 64; ++n) {
    const auto m = static_cast<uint64_t>(sqrt2.floor_times(n));
    const auto shifted = rotate_set(sys, A, static_cast<int64_t>(m));
    const CircleSet* sets[] = {&A, &shifted};
    const double measure = CircleSet::intersection_measure(sets);
    const double s = std::fmod(static_cast<double>(m) * 0.35355339059327379, 1.0);
    const double dist = std::min(s, 1.0 - s);
    const double oracle = dist < 0.25 ? 0.25 - dist : 0.0;
    CHECK(measure == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("heisenberg reduction is idempotent and lattice-compatible") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const HeisenbergSystem::Point p{u(rng), u(rng), u(rng)};
    const auto r1 = HeisenbergSystem::reduce(p);
    const auto r2 = HeisenbergSystem::reduce(r1);
    for (int i = 0; i < 3; ++i) {
      CHECK(r1[i] >= 0.0);
      CHECK(r1[i] < 1.0);
      CHECK(r1[i] == doctest::Approx(r2[i]).epsilon(1e-15));
    }
  }
  // An integer lattice element acts trivially on the quotient.
  const HeisenbergSystem latt{{1.0, 0.0, 0.0}};
  const HeisenbergSystem::Point x0{0.3, 0.4, 0.5};
  const int64_t exps[] = {0, 1, 5, 12};
  const auto orbit = heisenberg_orbit(latt, x0, exps);
  for (const auto& pt : orbit) {
    CHECK(pt[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(pt[1] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(pt[2] == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("heisenberg raw group law is associative; reduction respects it") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const HeisenbergSystem::Point a{u(rng), u(rng), u(rng)};
    const HeisenbergSystem::Point b{u(rng), u(rng), u(rng)};
    const HeisenbergSystem::Point c{u(rng), u(rng), u(rng)};
    const auto left = HeisenbergSystem::compose(HeisenbergSystem::compose(a, b), c);
    const auto right = HeisenbergSystem::compose(a, HeisenbergSystem::compose(b, c));
    for (int i = 0; i < 3; ++i) CHECK(left[i] == doctest::Approx(right[i]).epsilon(1e-12));
    const auto lred = HeisenbergSystem::reduce(left);
    const auto rred = HeisenbergSystem::reduce(right);
    for (int i = 0; i < 3; ++i) CHECK(lred[i] == doctest::Approx(rred[i]).epsilon(1e-12));
  }
  // Reduction canonicalizes left cosets: gamma * p reduces to reduce(p).
  const HeisenbergSystem::Point p{0.37, 0.82, 0.55};
  const HeisenbergSystem::Point gamma{2.0, -1.0, 3.0};
  const auto shifted = HeisenbergSystem::compose(gamma, p);
  const auto a1 = HeisenbergSystem::reduce(shifted);
  const auto a2 = HeisenbergSystem::reduce(p);
  for (int i = 0; i < 3; ++i) CHECK(a1[i] == doctest::Approx(a2[i]).epsilon(1e-12));
}

TEST_CASE("closed-form powers match raw repeated composition") {
  const HeisenbergSystem sys{{std::sqrt(2.0), std::sqrt(3.0), 0.0}};
  const HeisenbergSystem::Point id{0.0, 0.0, 0.0};
  const HeisenbergSystem::Point g1{sys.g[0], sys.g[1], sys.g[2]};
  HeisenbergSystem::Point acc = g1;  // unreduced g^e
  for (int64_t e = 1; e <= 200; ++e) {
    const auto walked = HeisenbergSystem::multiply(acc, id);
    const int64_t exps[] = {e};
    const auto direct = heisenberg_orbit(sys, id, exps)[0];
    // The raw walk accumulates z ~ e^2 ab / 2, so compare absolutely.
    for (int i = 0; i < 3; ++i) CHECK(std::abs(walked[i] - direct[i]) < 1e-9);
    acc = HeisenbergSystem::compose(g1, acc);
  }
  // g^{e1+e2} = g^{e1} g^{e2} on orbit points (raw products, one reduction).
  const HeisenbergSystem::Point x0{0.2, 0.6, 0.9};
  const auto split = HeisenbergSystem::reduce(
      HeisenbergSystem::compose(sys.power(5), HeisenbergSystem::compose(sys.power(7), x0)));
  const auto direct = HeisenbergSystem::reduce(HeisenbergSystem::compose(sys.power(12), x0));
  for (int i = 0; i < 3; ++i) CHECK(split[i] == doctest::Approx(direct[i]).epsilon(1e-10));
  CHECK_THROWS_AS(sys.power(2000000000), ulab::invalid_argument);
  CHECK_THROWS_AS(sys.power(999999999), ulab::precision_error);  // e(e-1)/2 ~ 5e17 > 2^53
}

TEST_CASE("nilsequence windows are bounded by 1") {
  NilsequenceSpec heis;
  heis.kind = NilsequenceKind::HeisenbergLipschitz;
  const auto w = nilsequence_sample(heis, 2000);
  for (const auto& v : w.values) CHECK(std::abs(v) <= 1.0 + 1e-12);

  NilsequenceSpec poly;
  poly.kind = NilsequenceKind::PolynomialPhase;
  poly.coeffs = {0.1, 0.3, 0.02, 0.001};
  const auto pw = nilsequence_sample(poly, 2000);
  for (const auto& v : pw.values) CHECK(std::abs(v) == doctest::Approx(1.0).epsilon(1e-12));

  NilsequenceSpec zero;
  zero.coeffs = {0.0};
  const auto ones = nilsequence_sample(zero, 16);
  for (const auto& v : ones.values) CHECK(v == complexd{1.0, 0.0});
}

TEST_CASE("grid L2 distance examples") {
  GridFunction f, g;
  f.grid = {1, 1024};
  g.grid = {1, 1024};
  f.values.assign(1024, {1.0, 0.0});
  g.values.assign(1024, {0.0, 0.0});
  CHECK(grid_l2_distance(f, f) == 0.0);
  CHECK(grid_l2_distance(f, g) == doctest::Approx(1.0).epsilon(1e-15));
  // Half indicator vs zero: RMS = 1/sqrt(2).
  for (size_t i = 0; i < 512; ++i) f.values[i] = {1.0, 0.0};
  for (size_t i = 512; i < 1024; ++i) f.values[i] = {0.0, 0.0};
  CHECK(grid_l2_distance(f, g) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.01));
  GridFunction bad;
  bad.grid = {1, 512};
  bad.values.assign(512, {0.0, 0.0});
  CHECK_THROWS_AS(grid_l2_distance(f, bad), ulab::invalid_argument);
}

TEST_CASE("lipschitz grid observable samples at the nearest grid slot") {
  ulab::systems::LipschitzGrid grid;
  grid.samples = {0.0, 0.25, 0.5, 0.75};
  grid.lipschitz = 1.0;
  const Observable obs{Observable::Payload{grid}};
  CHECK(obs.sup() == 0.75);
  CHECK(obs.eval_circle(ulab::fixed128::from_double(0.30)).real() == 0.25);
  CHECK(obs.eval_circle(ulab::fixed128::from_double(0.99)).real() == 0.75);
  CHECK(obs.eval_circle(0).real() == 0.0);
}

TEST_CASE("product-torus rotation preserves box counts under push-forward") {
  // dim-2 rotation: count grid points landing in a box before and after the
  // shift; measure preservation at grid resolution.
  const auto a1 = Irrational::sqrt_of(2);
  const auto a2 = Irrational::sqrt_of(3);
  RotationSystem torus;
  torus.alpha = {a1, a2};
  CHECK(torus.dim() == 2);
  const uint64_t G = 256;
  const auto box_lo = ulab::fixed128::from_double(0.2);
  const auto box_hi = ulab::fixed128::from_double(0.7);
  const auto in_box = [&](ulab::fixed128::u128 x, ulab::fixed128::u128 y) {
    return x >= box_lo && x < box_hi && y >= box_lo && y < box_hi;
  };
  for (int64_t steps : {1, 57, 1000}) {
    uint64_t direct = 0, pushed = 0;
    const auto s1 = a1.frac_bits(static_cast<uint64_t>(steps));
    const auto s2 = a2.frac_bits(static_cast<uint64_t>(steps));
    for (uint64_t i = 0; i < G; ++i) {
      for (uint64_t j = 0; j < G; ++j) {
        const auto x = ulab::fixed128::grid_point(i, G);
        const auto y = ulab::fixed128::grid_point(j, G);
        direct += in_box(x, y) ? 1 : 0;
        pushed += in_box(x + s1, y + s2) ? 1 : 0;
      }
    }
    // Push-forward counts match the direct count to the boundary band O(G).
    const auto diff = direct > pushed ? direct - pushed : pushed - direct;
    CHECK(diff <= 4 * G);
    CHECK(direct > 0);
  }
}

TEST_CASE("exact arc measure agrees with grid quadrature") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto sys = RotationSystem::circle(Irrational::sqrt_of(3));
  for (int trial = 0; trial < 5; ++trial) {
    const double lo = u(rng);
    const auto A = CircleSet::interval(lo, lo + 0.2 + 0.5 * u(rng));
    const auto B = rotate_set(sys, A, static_cast<int64_t>(rng() % 1000));
    const CircleSet* sets[] = {&A, &B};
    const double exact = CircleSet::intersection_measure(sets);
    const uint64_t G = 1 << 16;
    uint64_t hits = 0;
    for (uint64_t j = 0; j < G; ++j) {
      const auto x = ulab::fixed128::grid_point(j, G);
      if (A.contains(x) && B.contains(x)) ++hits;
    }
    const double quad = static_cast<double>(hits) / static_cast<double>(G);
    CHECK(std::abs(exact - quad) < 5e-4);
  }
}

TEST_SUITE_END();
