#include "ulab/sequences.hpp"

#include <algorithm>
#include <cmath>

#include "ulab/errors.hpp"
#include "ulab/parallel.hpp"

namespace ulab::sequences {

namespace {

constexpr u128 kHalf = static_cast<u128>(1) << 127;

bool is_perfect_square(uint64_t d) {
  const auto r = static_cast<uint64_t>(std::sqrt(static_cast<double>(d)));
  for (uint64_t x = r > 0 ? r - 1 : 0; x <= r + 1; ++x)
    if (x * x == d) return true;
  return false;
}

}  // namespace

Irrational::Irrational(uint64_t int_part, u128 frac, std::string label)
    : int_(int_part), frac_(frac), label_(std::move(label)) {
  check_not_near_rational();
}

Irrational Irrational::sqrt_of(uint64_t d) {
  if (d < 2 || is_perfect_square(d))
    throw invalid_argument("Irrational::sqrt_of: d must be a non-square >= 2");
  const auto s = fixed128::sqrt_fixed(d);
  return Irrational(s.int_part, s.frac, "sqrt" + std::to_string(d));
}

Irrational Irrational::golden() {
  // (1 + sqrt 5)/2: fraction part is (sqrt5 - 2)/2 + 1/2.
  const auto s5 = fixed128::sqrt_fixed(5);
  const u128 frac = (s5.frac >> 1) | kHalf;
  return Irrational(1, frac, "golden");
}

Irrational Irrational::scaled(uint64_t num, uint64_t den) const {
  const auto v = fixed128::scale_rational(int_, frac_, num, den);
  std::string label = label_;
  if (num != 1) label = std::to_string(num) + "*" + label;
  if (den != 1) label += "/" + std::to_string(den);
  return Irrational(v.int_part, v.frac, label);
}

Irrational Irrational::named(const std::string& label) {
  if (label == "sqrt2") return sqrt_of(2);
  if (label == "sqrt3") return sqrt_of(3);
  if (label == "sqrt5") return sqrt_of(5);
  if (label == "sqrt7") return sqrt_of(7);
  if (label == "golden") return golden();
  if (label == "inv2sqrt2") return sqrt_of(2).scaled(1, 4);  // 1/(2*sqrt2) = sqrt2/4
  throw invalid_argument("unknown irrational label: " + label);
}

void Irrational::check_not_near_rational() const {
  if (frac_ == 0) throw invalid_argument("Irrational: value is an integer");
  // Walk the continued fraction of frac_/2^128; convergents p/q are the best
  // rational approximations, and |q*frac - p*2^128| equals the Euclid
  // remainder at each step. Reject if any q <= 10^6 approximates alpha
  // within 1e-13.
  const u128 threshold_unit = fixed128::from_double(1e-13);  // 1e-13 * 2^128
  u128 rem_prev = 0;                                         // represents 2^128
  u128 rem = frac_;
  uint64_t q_prev = 0, q = 1;
  // First step: a = floor(2^128 / frac_), remainder 2^128 mod frac_.
  while (true) {
    u128 a, next;
    if (rem_prev == 0) {  // 2^128 stage, handled without overflow
      const u128 wrapped = static_cast<u128>(0) - rem;  // 2^128 - rem
      a = wrapped / rem + 1;
      next = wrapped % rem;
    } else {
      a = rem_prev / rem;
      next = rem_prev % rem;
    }
    const uint64_t q_next64 = q_prev + static_cast<uint64_t>(std::min<u128>(a, 1u << 30)) * q;
    if (q_next64 > 2'000'000 || a > (1u << 30)) {
      // Denominators past the window; the last convergent inside it decides.
      break;
    }
    const uint64_t q_next = q_next64;
    // Distance |alpha - p/q_next| = next / (q_next * 2^128); require > 1e-13.
    if (q_next <= 1'000'000 && next <= threshold_unit * q_next)
      throw invalid_argument("Irrational '" + label_ +
                             "': within 1e-13 of a rational with denominator " +
                             std::to_string(q_next));
    if (next == 0) throw invalid_argument("Irrational '" + label_ + "': value is rational");
    rem_prev = rem;
    rem = next;
    q_prev = q;
    q = q_next;
    if (q > 1'000'000) break;
  }
}

fixed128::FloorFrac Irrational::mul_checked(uint64_t n) const {
  if (n > kMaxMultiplier)
    throw precision_error("Irrational '" + label_ + "': multiplier " + std::to_string(n) +
                          " exceeds the precision budget " + std::to_string(kMaxMultiplier));
  auto f = fixed128::mul(frac_, n);
  f.floor_part += static_cast<int64_t>(int_ * n);
  // Guard: if frac(n*alpha) sits within the accumulated rounding error of an
  // integer, the floor can no longer be trusted. Unreachable for quadratic
  // irrationals inside the budget; a trip means a bad alpha was smuggled in.
  const u128 guard = static_cast<u128>(n + 2) << 16;
  if (f.frac < guard || f.frac > static_cast<u128>(0) - guard)
    throw precision_error("Irrational '" + label_ + "': frac(" + std::to_string(n) +
                          "*alpha) is too close to an integer at working precision");
  return f;
}

int64_t Irrational::floor_times(uint64_t n) const {
  if (n == 0) return 0;
  return mul_checked(n).floor_part;
}

u128 Irrational::frac_bits(uint64_t n) const {
  if (n == 0) return 0;
  return mul_checked(n).frac;
}

double Irrational::value() const { return static_cast<double>(int_) + fixed128::to_double(frac_); }

BracketPattern BracketPattern::make(PatternKind kind, int k, Irrational alpha) {
  if (k < 1) throw invalid_argument("BracketPattern: k must be >= 1");
  return BracketPattern{kind, k, std::move(alpha)};
}

BracketPattern BracketPattern::linear(int k) {
  if (k < 1) throw invalid_argument("BracketPattern: k must be >= 1");
  return BracketPattern{PatternKind::Linear, k, Irrational::sqrt_of(2)};
}

const char* pattern_kind_name(PatternKind kind) {
  switch (kind) {
    case PatternKind::ScaledFloor: return "scaled_floor";
    case PatternKind::FloorScaled: return "floor_scaled";
    case PatternKind::Linear: return "linear";
  }
  return "?";
}

uint64_t factorial(unsigned n) {
  uint64_t f = 1;
  for (unsigned i = 2; i <= n; ++i) f *= i;
  return f;
}

IntervalWeight IntervalWeight::cell(int k, uint64_t index) {
  if (k < 1) throw invalid_argument("IntervalWeight: k must be >= 1");
  const uint64_t cells = factorial(static_cast<unsigned>(k) + 1);
  if (index < 1 || index > cells)
    throw invalid_argument("IntervalWeight: cell index must lie in [1, (k+1)!]");
  IntervalWeight w;
  w.k_ = k;
  w.index_ = index;
  w.cells_ = cells;
  w.lo_ = fixed128::rational_point(index - 1, cells);
  w.hi_ = index == cells ? static_cast<u128>(0) - 1 : fixed128::rational_point(index, cells);
  return w;
}

IntervalWeight IntervalWeight::custom(int k, uint64_t index, double lo, double hi, uint64_t cells) {
  if (k < 1) throw invalid_argument("IntervalWeight: k must be >= 1");
  if (cells == 0) cells = factorial(static_cast<unsigned>(k) + 1);
  if (index < 1 || index > cells)
    throw invalid_argument("IntervalWeight: cell index must lie in [1, cells]");
  if (!(lo < hi) || lo < 0.0 || hi > 1.0)
    throw invalid_argument("IntervalWeight: need 0 <= lo < hi <= 1");
  // [lo, hi] must sit inside the cell, so no partition point is internal.
  if (lo * static_cast<double>(cells) < static_cast<double>(index - 1) ||
      hi * static_cast<double>(cells) > static_cast<double>(index))
    throw invalid_argument(
        "IntervalWeight: support leaves cell " + std::to_string(index) + "/" +
        std::to_string(cells) + "; it would contain an internal partition point");
  IntervalWeight w;
  w.k_ = k;
  w.index_ = index;
  w.cells_ = cells;
  w.lo_ = fixed128::from_double(lo);
  w.hi_ = hi >= 1.0 ? static_cast<u128>(0) - 1 : fixed128::from_double(hi);
  return w;
}

std::vector<int64_t> bracket_exponents(const BracketPattern& pattern, uint64_t n) {
  std::vector<int64_t> out(static_cast<size_t>(pattern.k));
  for (int i = 1; i <= pattern.k; ++i) out[static_cast<size_t>(i - 1)] = bracket_exponent(pattern, i, n);
  return out;
}

int64_t bracket_exponent(const BracketPattern& pattern, int v, uint64_t n) {
  if (v < 1 || v > pattern.k) throw invalid_argument("bracket_exponent: v out of [1, k]");
  switch (pattern.kind) {
    case PatternKind::Linear:
      return static_cast<int64_t>(v) * static_cast<int64_t>(n);
    case PatternKind::ScaledFloor:
      return static_cast<int64_t>(v) * pattern.alpha.floor_times(n);
    case PatternKind::FloorScaled:
      return pattern.alpha.floor_times(static_cast<uint64_t>(v) * n);
  }
  return 0;
}

int64_t closest_integer_correction(const Irrational& alpha, uint64_t v, uint64_t h) {
  if (v < 1 || h < 1) throw invalid_argument("closest_integer_correction: v, h must be >= 1");
  // v * frac(h*alpha), exactly; round its 128-bit fraction to nearest.
  const auto scaled = fixed128::mul(alpha.frac_bits(h), v);
  const u128 dist_to_half = scaled.frac > kHalf ? scaled.frac - kHalf : kHalf - scaled.frac;
  static const u128 kTie = fixed128::from_double(1e-9);
  if (dist_to_half < kTie)
    throw degenerate_input("closest_integer_correction: v*frac(h*alpha) within 1e-9 of a half-integer");
  return scaled.floor_part + (scaled.frac >= kHalf ? 1 : 0);
}

int64_t bracket_difference(const BracketPattern& pattern, uint64_t n, uint64_t h, int v) {
  if (n < 1 || h < 1) throw invalid_argument("bracket_difference: n, h must be >= 1");
  return bracket_exponent(pattern, v, n + h) - bracket_exponent(pattern, v, n);
}

int64_t expected_bracket_difference(const BracketPattern& pattern, int v, uint64_t h) {
  if (v < 1 || v > pattern.k) throw invalid_argument("expected_bracket_difference: v out of [1, k]");
  switch (pattern.kind) {
    case PatternKind::Linear:
      return static_cast<int64_t>(v) * static_cast<int64_t>(h);
    case PatternKind::ScaledFloor:
      return static_cast<int64_t>(v) *
             (pattern.alpha.floor_times(h) + closest_integer_correction(pattern.alpha, 1, h));
    case PatternKind::FloorScaled:
      return static_cast<int64_t>(v) * pattern.alpha.floor_times(h) +
             closest_integer_correction(pattern.alpha, static_cast<uint64_t>(v), h);
  }
  return 0;
}

IdentityReport identity_verifier(const BracketPattern& pattern, const IntervalWeight& weight,
                                 uint64_t n_max, uint64_t h_max, uint64_t t2_h_max) {
  if (n_max < 1 || h_max < 1) throw invalid_argument("identity_verifier: n_max, h_max must be >= 1");
  if (pattern.kind == PatternKind::Linear)
    throw invalid_argument("identity_verifier: only bracket kinds have something to verify");

  const uint64_t top = n_max + h_max + 2 * t2_h_max;
  const auto& alpha = pattern.alpha;

  // frac(n*alpha) table; everything downstream is exact integer work.
  std::vector<u128> frac(top + 1);
  for (uint64_t n = 1; n <= top; ++n) frac[n] = alpha.frac_bits(n);
  std::vector<uint8_t> in_support(top + 1, 0);
  for (uint64_t n = 1; n <= top; ++n) in_support[n] = weight.contains(frac[n]) ? 1 : 0;

  // Expected n-independent step per (v, h).
  const int k = pattern.k;
  std::vector<int64_t> expected(static_cast<size_t>(k) * (std::max(h_max, t2_h_max) + 1), 0);
  const uint64_t h_top = std::max(h_max, t2_h_max);
  for (uint64_t h = 1; h <= h_top; ++h)
    for (int v = 1; v <= k; ++v)
      expected[static_cast<size_t>(v - 1) * (h_top + 1) + h] = expected_bracket_difference(pattern, v, h);

  std::vector<int64_t> a_val(static_cast<size_t>(k) * (top + 1), 0);
  for (uint64_t n = 1; n <= top; ++n)
    for (int v = 1; v <= k; ++v)
      a_val[static_cast<size_t>(v - 1) * (top + 1) + n] = bracket_exponent(pattern, v, n);

  // Partition the n range across workers; concatenate in ascending order.
  const size_t n_blocks = 64;
  std::vector<IdentityReport> parts(n_blocks);
  const uint64_t block_len = (n_max + n_blocks - 1) / n_blocks;
  parallel::parallel_for(n_blocks, [&](size_t b) {
    IdentityReport& rep = parts[b];
    const uint64_t n_lo = 1 + b * block_len;
    const uint64_t n_hi = std::min(n_max, n_lo + block_len - 1);
    for (uint64_t n = n_lo; n <= n_hi; ++n) {
      if (!in_support[n]) continue;
      for (uint64_t h = 1; h <= h_max; ++h) {
        if (!in_support[n + h]) continue;
        ++rep.pairs_checked;
        for (int v = 1; v <= k; ++v) {
          const int64_t actual = a_val[static_cast<size_t>(v - 1) * (top + 1) + n + h] -
                                 a_val[static_cast<size_t>(v - 1) * (top + 1) + n];
          const int64_t want = expected[static_cast<size_t>(v - 1) * (h_top + 1) + h];
          if (actual != want)
            rep.violations.push_back({n, h, 0, v, want, actual, fixed128::to_double(frac[n]),
                                      fixed128::to_double(frac[n + h])});
        }
      }
      if (t2_h_max == 0) continue;
      // Two-step spot check: all four corners in the support.
      for (uint64_t h1 = 1; h1 <= t2_h_max; ++h1) {
        if (!in_support[n + h1]) continue;
        for (uint64_t h2 = 1; h2 <= t2_h_max; ++h2) {
          if (!in_support[n + h2] || !in_support[n + h1 + h2]) continue;
          ++rep.t2_tuples_checked;
          for (int v = 1; v <= k; ++v) {
            const auto* row = &a_val[static_cast<size_t>(v - 1) * (top + 1)];
            const int64_t e1 = expected[static_cast<size_t>(v - 1) * (h_top + 1) + h1];
            const int64_t e2 = expected[static_cast<size_t>(v - 1) * (h_top + 1) + h2];
            const bool ok = row[n + h1] - row[n] == e1 && row[n + h2] - row[n] == e2 &&
                            row[n + h1 + h2] - row[n] == e1 + e2;
            if (!ok)
              rep.violations.push_back({n, h1, h2, v, e1 + e2, row[n + h1 + h2] - row[n],
                                        fixed128::to_double(frac[n]),
                                        fixed128::to_double(frac[n + h1 + h2])});
          }
        }
      }
    }
  });

  IdentityReport out;
  for (auto& p : parts) {
    out.pairs_checked += p.pairs_checked;
    out.t2_tuples_checked += p.t2_tuples_checked;
    out.violations.insert(out.violations.end(), p.violations.begin(), p.violations.end());
  }
  return out;
}

std::vector<uint64_t> level_set(const Irrational& alpha, double threshold, uint64_t N) {
  if (!(threshold > 0.0) || !(threshold < 1.0))
    throw invalid_argument("level_set: threshold must lie in (0, 1)");
  const u128 t = fixed128::from_double(threshold);
  std::vector<uint64_t> out;
  for (uint64_t m = 1; m <= N; ++m)
    if (alpha.frac_bits(m) < t) out.push_back(m);
  return out;
}

}  // namespace ulab::sequences
