#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ulab/gowers.hpp"
#include "ulab/primes.hpp"
#include "ulab/sequences.hpp"
#include "ulab/systems.hpp"

namespace ulab::averages {

using gowers::SequenceWindow;
using gowers::complexd;
using sequences::BracketPattern;
using systems::CircleSet;
using systems::DynamicalSystem;
using systems::GridFunction;
using systems::GridSpec;
using systems::Observable;
using systems::RotationSystem;

// Multiplicative weight attached to an average. The von Mangoldt factor is
// evaluated at the mapped index m = stride*n + offset; the modified von
// Mangoldt factor at W*n + r with the weight's own parameters; the interval
// factor at frac(m * alpha) with the pattern's alpha.
struct WeightSpec {
  enum class Kind { unit, von_mangoldt_prime, modified_mangoldt };
  Kind kind = Kind::unit;
  std::optional<primes::WTrickParams> wtrick;
  std::optional<sequences::IntervalWeight> interval;
  const SequenceWindow* window = nullptr;  // extra multiplier indexed by n

  static WeightSpec unit() { return {}; }
  static WeightSpec von_mangoldt();
  static WeightSpec modified(primes::WTrickParams params);

  std::string label() const;
};

struct AverageSpec {
  const DynamicalSystem* system = nullptr;
  std::vector<Observable> observables;  // f_1..f_k, k = pattern.k
  std::optional<Observable> f0;         // optional untranslated factor
  BracketPattern pattern = BracketPattern::linear(1);
  WeightSpec weight;
  uint64_t N = 0;
  uint64_t stride = 1;  // index map m(n) = stride*n + offset
  uint64_t offset = 0;
  GridSpec grid;
  const primes::PrimeTables* tables = nullptr;  // required by prime weights
};

struct ProfilePoint {
  uint64_t N = 0;
  double value = 0.0;
  std::string meta;
};

// x -> (1/N) sum_{n<=N} weight(n) prod_i f_i(T^{a_i(m(n))} x), sampled on the grid.
GridFunction multi_average(const AverageSpec& spec);

// Uniform average over primes p <= N: (1/pi(N)) sum_p prod_i f_i(T^{a_i(p)} x).
GridFunction prime_average(const AverageSpec& spec);

// multi_average along the progression W n + r.
GridFunction w_tricked_average(const AverageSpec& spec, const primes::WTrickParams& params);

// | (1/pi(N)^k) sum_p a(p_1..p_k) - (1/N^k) sum_n prod Lambda'(n_i) a(n_1..n_k) |.
double prime_vs_mangoldt_compare(
    const std::function<complexd(std::span<const uint64_t>)>& fn,
    const primes::PrimeTables& tables, uint64_t N, int k);

// Exact path: for each n in n_list, mu(A cap T^{-a_1(n)}A cap ... cap T^{-a_k(n)}A).
std::vector<ProfilePoint> recurrence_sequence(const RotationSystem& system, const CircleSet& set,
                                              const BracketPattern& pattern,
                                              std::span<const uint64_t> n_list);

// (1/N) sum_{n<=N} weight(n) mu(cap_i T^{-a_i(n)} A), exact arc arithmetic.
double recurrence_average(const RotationSystem& system, const CircleSet& set,
                          const BracketPattern& pattern, uint64_t N, const WeightSpec& weight,
                          const primes::PrimeTables* tables = nullptr);

// ||A(N_{j+1}) - A(N_j)||_{L^2(grid)} for consecutive window sizes.
std::vector<ProfilePoint> cauchy_profile(const AverageSpec& base, std::span<const uint64_t> n_list);

// Cube average over prime (or shifted-prime) boxes:
// (1/|P|^k) sum_{n in P^k} prod_{eps != 0} f_eps(T^{W_N (eps . n)} x).
struct CubeSpec {
  const DynamicalSystem* system = nullptr;
  std::vector<Observable> observables;  // indexed by eps = 1..2^k-1 (binary)
  int k = 1;
  uint64_t N = 0;
  int shift = 0;        // 0: primes; +1/-1: shifted primes
  uint64_t W_N = 1;     // constant exponent factor
  GridSpec grid;
  const primes::PrimeTables* tables = nullptr;
};
GridFunction cube_average(const CubeSpec& spec);

struct CubeBoundReport {
  uint64_t N = 0;
  double lhs = 0.0;    // grid L2 norm of the weighted cube average
  double rhs = 0.0;    // U^2(Z_2N) norm of b_j embedded
  double ratio = 0.0;  // lhs / (rhs + 1e-6)
};

// Weighted integer cube (1/N^k) sum prod b_i(n_i) prod_{eps != 0} T^{eps.n} f_eps
// against the U^2 norm of b_j. Rotation systems, k <= 2.
CubeBoundReport cube_bound_check(std::span<const SequenceWindow> b, const CubeSpec& spec, int j);

// Weighted linear multiple average (pattern a_i(n) = i n) with a bounded
// window weight; prime_indexed switches the index set to primes.
GridFunction nilweighted_average(const DynamicalSystem& system,
                                 std::span<const Observable> observables,
                                 const SequenceWindow& weight, uint64_t N, bool prime_indexed,
                                 const GridSpec& grid, const primes::PrimeTables* tables);

struct VdcReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 4.0;
  bool pass = false;
};

// van der Corput check: ||E_n v(n)||^2 against
// (1/N^2) sum ||v(n)||^2 + (1/N) sum_h |(1/N) sum_n <v(n+h), v(n)>|.
VdcReport vdc_check(std::span<const std::vector<complexd>> vectors, double constant = 4.0);

}  // namespace ulab::averages
