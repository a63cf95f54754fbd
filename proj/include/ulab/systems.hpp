#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ulab/gowers.hpp"
#include "ulab/sequences.hpp"

namespace ulab::systems {

using fixed128::u128;
using gowers::SequenceWindow;
using gowers::complexd;

// A finite union of half-open arcs on the circle, held in 128-bit fixed
// point. Rotation shifts are exact (unsigned wrap is the mod-1 reduction), so
// measures are preserved bit-for-bit and an empty intersection is exactly
// empty.
class CircleSet {
 public:
  struct Arc {
    u128 lo = 0;
    u128 len = 0;
  };

  CircleSet() = default;

  // Arcs as (lo, hi) pairs mod 1; hi > lo, hi - lo <= 1. (-0.125, 0.125) is fine.
  static CircleSet from_arcs(std::span<const std::pair<double, double>> arcs);
  static CircleSet interval(double lo, double hi);
  static CircleSet full_circle();

  bool empty() const { return arcs_.empty(); }
  size_t arc_count() const { return arcs_.size(); }
  u128 measure_bits() const;
  double measure() const { return fixed128::to_double(measure_bits()); }

  bool contains(u128 x) const;
  CircleSet translated(u128 delta) const;  // {x + delta : x in set}

  // Canonical arcs, split at 0, sorted, disjoint.
  const std::vector<Arc>& arcs() const { return arcs_; }
  std::vector<std::pair<double, double>> arcs_double() const;

  // Exact Lebesgue measure of the intersection of up to 16 sets.
  static u128 intersection_measure_bits(std::span<const CircleSet* const> sets);
  static double intersection_measure(std::span<const CircleSet* const> sets);

 private:
  void normalize(std::vector<Arc> raw);
  std::vector<Arc> arcs_;  // canonical
};

// x -> x + alpha (coordinatewise, mod 1).
struct RotationSystem {
  std::vector<sequences::Irrational> alpha;
  int dim() const { return static_cast<int>(alpha.size()); }
  static RotationSystem circle(sequences::Irrational a);
};

// T^{-steps} A = A - steps*alpha, exact; measure is preserved bit-for-bit.
CircleSet rotate_set(const RotationSystem& system, const CircleSet& set, int64_t steps);

// Heisenberg nilsystem on [0,1)^3 with group law
// (x,y,z)(x',y',z') = (x+x', y+y', z+z'+x y') and integer lattice quotient.
struct HeisenbergSystem {
  std::array<double, 3> g{0.0, 0.0, 0.0};

  using Point = std::array<double, 3>;
  // The reduction canonicalizes left cosets: reduce(gamma * p) = reduce(p)
  // for every lattice element gamma. Compose raw representatives first and
  // reduce once at the end.
  static Point reduce(const Point& p);
  static Point compose(const Point& a, const Point& b);   // raw group law
  static Point multiply(const Point& a, const Point& b);  // compose, then reduce
  // g^e by the closed form (e a, e b, e c + e(e-1)/2 ab), unreduced; guards
  // the double-precision range.
  Point power(int64_t e) const;
};

// Reduced coordinates of g^e * x0 for each exponent.
std::vector<HeisenbergSystem::Point> heisenberg_orbit(const HeisenbergSystem& system,
                                                      const HeisenbergSystem::Point& x0,
                                                      std::span<const int64_t> exponents);

// Finite cyclic shift x -> x + 1 on Z_m.
struct CyclicShiftSystem {
  uint32_t m = 1;
};

using DynamicalSystem = std::variant<RotationSystem, HeisenbergSystem, CyclicShiftSystem>;

// Bounded observables; `sup` is recorded at construction.
struct ArcIndicator {
  CircleSet set;
};
struct TrigPolynomial {
  // f(x) = sum_j coeff_j e(freq_j x); 1-dimensional.
  std::vector<std::pair<int32_t, complexd>> terms;
};
struct HeisenbergBump {
  // max(0, 1 - 4 dist(p, center)) under the flat metric on [0,1)^3.
  std::array<double, 3> center{0.5, 0.5, 0.5};
};
struct CyclicVector {
  std::vector<complexd> values;  // one per residue
};
struct LipschitzGrid {
  std::vector<double> samples;  // values at j/G on the circle
  double lipschitz = 0.0;
};

class Observable {
 public:
  using Payload = std::variant<ArcIndicator, TrigPolynomial, HeisenbergBump, CyclicVector, LipschitzGrid>;
  explicit Observable(Payload payload);

  double sup() const { return sup_; }
  const Payload& payload() const { return payload_; }

  // Evaluation entry points used by the averaging engine.
  complexd eval_circle(u128 x) const;                       // rotation systems
  complexd eval_point(const std::array<double, 3>& p) const;  // Heisenberg
  complexd eval_residue(uint64_t idx) const;                // cyclic shifts

  static Observable indicator(CircleSet set);
  static Observable character(int32_t freq);  // e(freq * x)
  static Observable trig(std::vector<std::pair<int32_t, complexd>> terms);

 private:
  Payload payload_;
  double sup_ = 0.0;
};

// Uniform product grid on [0,1)^dim.
struct GridSpec {
  int dim = 1;
  uint64_t points_per_dim = 4096;
  uint64_t total() const {
    uint64_t t = 1;
    for (int i = 0; i < dim; ++i) t *= points_per_dim;
    return t;
  }
};

struct GridFunction {
  GridSpec grid;
  std::vector<complexd> values;
};

// Root-mean-square difference over grid points. Grids must match.
double grid_l2_distance(const GridFunction& f, const GridFunction& g);
double grid_l2_norm(const GridFunction& f);
double grid_sup_norm(const GridFunction& f);

enum class NilsequenceKind { HeisenbergLipschitz, PolynomialPhase };

struct NilsequenceSpec {
  NilsequenceKind kind = NilsequenceKind::PolynomialPhase;
  // Heisenberg: group element and base point.
  HeisenbergSystem system{{std::sqrt(2.0), std::sqrt(3.0), 0.0}};
  HeisenbergSystem::Point x0{0.0, 0.0, 0.0};
  // Polynomial phase: e(c0 + c1 n + ... + c_deg n^deg), degree <= 3.
  std::vector<double> coeffs{0.0};
};

// Length-N window sampled along the orbit; all values bounded by 1.
SequenceWindow nilsequence_sample(const NilsequenceSpec& spec, uint64_t length);

// Window b(n) = 1_A(R_alpha^{stride n} x0), the rotation-interval weight.
SequenceWindow rotation_indicator_window(const sequences::Irrational& alpha, const CircleSet& set,
                                         u128 x0, uint64_t stride, uint64_t length);

// Grid binary dump: magic "ULAB-GRID-1", dims, doubles (re/im interleaved).
void save_grid(const GridFunction& f, const std::string& path);

}  // namespace ulab::systems
