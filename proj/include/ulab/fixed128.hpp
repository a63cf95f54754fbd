#pragma once

#include <cstdint>

namespace ulab::fixed128 {

using u128 = unsigned __int128;

// A number x in [0,1) is stored as floor(x * 2^128). Addition wraps mod 1
// for free; comparisons and measure arithmetic are exact integer ops.

struct FloorFrac {
  int64_t floor_part;  // floor(m * x)
  u128 frac;           // frac(m * x) in fixed-point
};

// m * (frac / 2^128), split into integer and fractional part. Exact.
FloorFrac mul(u128 frac, uint64_t m) noexcept;

// Same for a small multiplier times a value that may exceed 1:
// (int_part + frac/2^128) * m.
FloorFrac mul_value(uint64_t int_part, u128 frac, uint64_t m) noexcept;

double to_double(u128 frac) noexcept;

// x must lie in [0,1); the 53 mantissa bits are placed exactly.
u128 from_double(double x);

// floor(j * 2^128 / g), 0 <= j < g: exact uniform grid coordinates on the circle.
u128 grid_point(uint64_t j, uint64_t g);

// floor(num * 2^128 / den) for num < den: exact rational point.
u128 rational_point(uint64_t num, uint64_t den);

// floor(sqrt(d) * 2^128), split into integer part and fraction bits.
// Exact to the last bit (digit-by-digit integer square root).
struct SqrtParts {
  uint64_t int_part;
  u128 frac;
};
SqrtParts sqrt_fixed(uint64_t d);

// (int_part + frac/2^128) * num / den with small num, den; floor division.
struct ValueParts {
  uint64_t int_part;
  u128 frac;
};
ValueParts scale_rational(uint64_t int_part, u128 frac, uint64_t num, uint64_t den);

}  // namespace ulab::fixed128
