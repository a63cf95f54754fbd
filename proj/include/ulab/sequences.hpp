#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ulab/fixed128.hpp"

namespace ulab::sequences {

using fixed128::u128;

// An irrational number carried as a 128-bit fixed-point fraction plus integer
// part. floor(n*alpha) and frac(n*alpha) are exact integer computations; the
// only error is the 1-ulp rounding of alpha itself, amplified by n. Every
// query checks the multiplier budget so a wrong floor cannot slip through.
class Irrational {
 public:
  // Largest multiplier accepted by frac/floor queries. At this bound the
  // accumulated endpoint error is below 2^-80.
  static constexpr uint64_t kMaxMultiplier = uint64_t(1) << 44;

  static Irrational sqrt_of(uint64_t d);  // d >= 2 and not a perfect square
  static Irrational golden();             // (1 + sqrt 5) / 2
  // alpha * num / den, e.g. sqrt_of(2).scaled(1, 4) = 1/(2*sqrt 2).
  Irrational scaled(uint64_t num, uint64_t den) const;
  // Named lookup used by configs: sqrt2, sqrt3, sqrt5, sqrt7, golden, inv2sqrt2.
  static Irrational named(const std::string& label);

  int64_t floor_times(uint64_t n) const;  // floor(n * alpha)
  u128 frac_bits(uint64_t n) const;       // frac(n * alpha), exact fixed-point
  double frac(uint64_t n) const { return fixed128::to_double(frac_bits(n)); }

  double value() const;
  u128 unit_frac_bits() const { return frac_; }
  uint64_t unit_int_part() const { return int_; }
  const std::string& label() const { return label_; }

 private:
  Irrational(uint64_t int_part, u128 frac, std::string label);
  void check_not_near_rational() const;
  fixed128::FloorFrac mul_checked(uint64_t n) const;

  uint64_t int_ = 0;
  u128 frac_ = 0;
  std::string label_;
};

// Exponent family a_1(n), ..., a_k(n).
enum class PatternKind {
  ScaledFloor,  // a_i(n) = i * floor(n*alpha)
  FloorScaled,  // a_i(n) = floor(i*n*alpha)
  Linear,       // a_i(n) = i * n
};

struct BracketPattern {
  PatternKind kind = PatternKind::Linear;
  int k = 1;
  Irrational alpha = Irrational::sqrt_of(2);  // unused for Linear

  static BracketPattern make(PatternKind kind, int k, Irrational alpha);
  static BracketPattern linear(int k);
};

const char* pattern_kind_name(PatternKind kind);

// One weight interval inside the (k+1)! partition of the circle. Membership is
// half-open [lo, hi); the interval may not contain any internal partition point.
class IntervalWeight {
 public:
  // The full i-th cell ((i-1)/(k+1)!, i/(k+1)!), 1 <= i <= (k+1)!.
  static IntervalWeight cell(int k, uint64_t index);
  // A sub-interval [lo, hi) of the i-th cell of a `cells`-piece partition
  // (cells defaults to (k+1)!; 2 is the coarse option for ScaledFloor runs).
  static IntervalWeight custom(int k, uint64_t index, double lo, double hi, uint64_t cells = 0);

  bool contains(u128 x) const { return x >= lo_ && x < hi_; }
  int k() const { return k_; }
  uint64_t index() const { return index_; }
  uint64_t cells() const { return cells_; }
  double lo() const { return fixed128::to_double(lo_); }
  double hi() const { return fixed128::to_double(hi_); }

 private:
  IntervalWeight() = default;
  int k_ = 1;
  uint64_t index_ = 1;
  uint64_t cells_ = 2;
  u128 lo_ = 0, hi_ = 0;
};

uint64_t factorial(unsigned n);

// [a_1(n), ..., a_k(n)], exact integers.
std::vector<int64_t> bracket_exponents(const BracketPattern& pattern, uint64_t n);

// Single exponent a_v(n) (v in [1, k]).
int64_t bracket_exponent(const BracketPattern& pattern, int v, uint64_t n);

// Nearest integer to v * frac(h*alpha); near-ties are precision failures.
int64_t closest_integer_correction(const Irrational& alpha, uint64_t v, uint64_t h);

// a_v(n+h) - a_v(n), computed from the exponents.
int64_t bracket_difference(const BracketPattern& pattern, uint64_t n, uint64_t h, int v);

// The n-independent value a_v(n+h) - a_v(n) must take when frac(n*alpha) and
// frac((n+h)*alpha) both lie in an interval clear of partition points:
//   ScaledFloor: v * (floor(h*alpha) + D_1(h))
//   FloorScaled: v * floor(h*alpha) + D_v(h)
// with D_v(h) the nearest integer to v*frac(h*alpha).
int64_t expected_bracket_difference(const BracketPattern& pattern, int v, uint64_t h);

struct IdentityViolation {
  uint64_t n = 0, h1 = 0, h2 = 0;  // h2 = 0 for single-step checks
  int v = 0;
  int64_t expected = 0, actual = 0;
  double frac_n = 0, frac_nh = 0;
};

struct IdentityReport {
  uint64_t pairs_checked = 0;    // (n,h) pairs with both fracs in the support
  uint64_t t2_tuples_checked = 0;
  std::vector<IdentityViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Exhaustive single-step check over n <= n_max, h <= h_max, 1 <= v <= k, plus
// a sampled two-step grid (h1, h2 <= t2_h_max) when t2_h_max > 0. Violations
// are returned as data, never thrown.
IdentityReport identity_verifier(const BracketPattern& pattern, const IntervalWeight& weight,
                                 uint64_t n_max, uint64_t h_max, uint64_t t2_h_max = 100);

// Ascending {m <= N : frac(m*alpha) < threshold}, 0 < threshold < 1.
std::vector<uint64_t> level_set(const Irrational& alpha, double threshold, uint64_t N);

}  // namespace ulab::sequences
