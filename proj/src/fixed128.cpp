#include "ulab/fixed128.hpp"

#include <cmath>

#include "ulab/errors.hpp"

namespace ulab::fixed128 {

namespace {

constexpr uint64_t lo64(u128 x) { return static_cast<uint64_t>(x); }
constexpr uint64_t hi64(u128 x) { return static_cast<uint64_t>(x >> 64); }

// 256-bit helper just wide enough for the square-root state machine.
struct U256 {
  u128 hi = 0, lo = 0;
};

bool operator>=(const U256& a, const U256& b) {
  return a.hi != b.hi ? a.hi > b.hi : a.lo >= b.lo;
}

U256 sub(const U256& a, const U256& b) {
  U256 r;
  r.lo = a.lo - b.lo;
  r.hi = a.hi - b.hi - (a.lo < b.lo ? 1 : 0);
  return r;
}

U256 shl(const U256& a, unsigned s) {
  // s in [1, 63]
  U256 r;
  r.hi = (a.hi << s) | (a.lo >> (128 - s));
  r.lo = a.lo << s;
  return r;
}

U256 or_small(const U256& a, uint64_t bits) {
  U256 r = a;
  r.lo |= bits;
  return r;
}

}  // namespace

FloorFrac mul(u128 frac, uint64_t m) noexcept {
  const uint64_t h = hi64(frac), l = lo64(frac);
  const u128 pl = static_cast<u128>(m) * l;
  const u128 ph = static_cast<u128>(m) * h;
  const u128 mid = static_cast<u128>(hi64(pl)) + lo64(ph);
  FloorFrac out;
  out.floor_part = static_cast<int64_t>(hi64(ph) + hi64(mid));
  out.frac = (static_cast<u128>(lo64(mid)) << 64) | lo64(pl);
  return out;
}

FloorFrac mul_value(uint64_t int_part, u128 frac, uint64_t m) noexcept {
  FloorFrac f = mul(frac, m);
  f.floor_part += static_cast<int64_t>(int_part * m);
  return f;
}

double to_double(u128 frac) noexcept {
  return std::ldexp(static_cast<double>(hi64(frac)), -64) +
         std::ldexp(static_cast<double>(lo64(frac)), -128);
}

u128 from_double(double x) {
  if (!(x >= 0.0) || x >= 1.0) throw invalid_argument("from_double: x must lie in [0,1)");
  if (x == 0.0) return 0;
  int e;
  const double mant = std::frexp(x, &e);  // x = mant * 2^e, mant in [0.5,1)
  const auto mant_bits = static_cast<uint64_t>(std::ldexp(mant, 53));  // exact
  const int shift = 128 + e - 53;  // position of mantissa LSB
  if (shift <= -53) return 0;
  if (shift < 0) return static_cast<u128>(mant_bits >> -shift);
  return static_cast<u128>(mant_bits) << shift;
}

u128 rational_point(uint64_t num, uint64_t den) {
  if (den == 0 || num >= den) throw invalid_argument("rational_point: need num < den");
  // Long division of num * 2^128 by den in base 2^64.
  const u128 d1 = (static_cast<u128>(num % den) << 64);
  const u128 q1 = d1 / den;
  const u128 d2 = ((d1 % den) << 64);
  const u128 q2 = d2 / den;
  return (q1 << 64) | q2;
}

u128 grid_point(uint64_t j, uint64_t g) { return rational_point(j, g); }

SqrtParts sqrt_fixed(uint64_t d) {
  if (d < 2) throw invalid_argument("sqrt_fixed: d must be >= 2");
  // floor(sqrt(d * 2^256)) by the classic two-bits-at-a-time method.
  // Bit i of N = d << 256 equals bit (i - 256) of d.
  int top = 63;
  while (top > 0 && !((d >> top) & 1)) --top;
  int nbits = 257 + top;           // N has (top+1)+256 bits
  if (nbits % 2) ++nbits;          // consume bit pairs from an even boundary
  U256 rem, root;
  for (int i = nbits / 2 - 1; i >= 0; --i) {
    const int b1 = 2 * i + 1 - 256, b0 = 2 * i - 256;
    const uint64_t pair =
        ((b1 >= 0 && b1 <= top ? (d >> b1) & 1 : 0) << 1) | (b0 >= 0 && b0 <= top ? (d >> b0) & 1 : 0);
    rem = or_small(shl(rem, 2), pair);
    const U256 trial = or_small(shl(root, 2), 1);  // 4*root + 1 == 2*(2*root) + 1
    if (rem >= trial) {
      rem = sub(rem, trial);
      root = or_small(shl(root, 1), 1);
    } else {
      root = shl(root, 1);
    }
  }
  SqrtParts out;
  out.int_part = lo64(root.hi);  // sqrt(d) < 2^32, so the integer part is tiny
  out.frac = root.lo;
  return out;
}

ValueParts scale_rational(uint64_t int_part, u128 frac, uint64_t num, uint64_t den) {
  if (den == 0 || num == 0) throw invalid_argument("scale_rational: num, den must be positive");
  // Multiply the 192-bit value (int_part, frac) by num: three 64-bit limbs.
  const uint64_t limbs_in[3] = {lo64(frac), hi64(frac), int_part};
  uint64_t limbs[4] = {0, 0, 0, 0};
  u128 carry = 0;
  for (int i = 0; i < 3; ++i) {
    const u128 p = static_cast<u128>(limbs_in[i]) * num + carry;
    limbs[i] = lo64(p);
    carry = hi64(p);
  }
  limbs[3] = lo64(carry);
  // Long division by den, top limb first.
  u128 r = 0;
  uint64_t q[4];
  for (int i = 3; i >= 0; --i) {
    const u128 cur = (r << 64) | limbs[i];
    q[i] = static_cast<uint64_t>(cur / den);
    r = cur % den;
  }
  if (q[3] != 0) throw invalid_argument("scale_rational: result overflows 64-bit integer part");
  ValueParts out;
  out.int_part = q[2];
  out.frac = (static_cast<u128>(q[1]) << 64) | q[0];
  return out;
}

}  // namespace ulab::fixed128
