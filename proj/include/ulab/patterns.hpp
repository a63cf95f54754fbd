#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ulab/primes.hpp"
#include "ulab/sequences.hpp"
#include "ulab/systems.hpp"

namespace ulab::patterns {

using sequences::BracketPattern;

// A subset of [1, N] held as a bit array, with a provenance label so runs
// are reproducible from their fingerprints.
class IntegerSet {
 public:
  static IntegerSet full(uint64_t N);
  static IntegerSet evens(uint64_t N);
  static IntegerSet bernoulli(uint64_t N, double density, uint64_t seed);
  // Members j <= N whose rotation orbit point frac(j*alpha) lies in the set.
  static IntegerSet orbit_hits(uint64_t N, const sequences::Irrational& alpha,
                               const systems::CircleSet& set);
  static IntegerSet from_members(uint64_t N, std::span<const uint64_t> members,
                                 std::string source);
  // File format: header "# ulab-set v1 N=<N>", then one integer per line.
  static IntegerSet load(const std::string& path);
  void save(const std::string& path) const;

  uint64_t N() const { return n_; }
  bool contains(uint64_t v) const {
    return v >= 1 && v <= n_ && (bits_[v >> 6] >> (v & 63)) & 1;
  }
  uint64_t count() const;
  double density() const { return static_cast<double>(count()) / static_cast<double>(n_); }
  const std::string& source() const { return source_; }
  const std::vector<uint64_t>& bits() const { return bits_; }

  void insert(uint64_t v);

 private:
  uint64_t n_ = 0;
  std::vector<uint64_t> bits_;
  std::string source_;
};

// (window size, max sliding-window density) per requested size.
struct DensityPoint {
  uint64_t window = 0;
  double max_density = 0.0;
};
std::vector<DensityPoint> upper_density_profile(const IntegerSet& set,
                                                std::span<const uint64_t> window_sizes);

struct PatternWitness {
  uint64_t m = 0;  // base point
  uint64_t n = 0;  // difference parameter, n = p + shift
  uint64_t p = 0;  // the prime
  std::vector<uint64_t> positions;  // m and m + a_i(n), all members
};

// Lexicographically least (n, m) witness with n = p + shift <= n_max, or
// nullopt when no witness exists in range (which never refutes anything).
std::optional<PatternWitness> find_pattern(const IntegerSet& set, const BracketPattern& pattern,
                                           int shift, uint64_t n_max,
                                           const primes::PrimeTables& tables);

struct CensusRow {
  uint64_t n = 0;
  uint64_t p = 0;
  uint64_t count = 0;       // #m with the whole pattern inside the set
  double density_estimate = 0.0;
};
std::vector<CensusRow> pattern_census(const IntegerSet& set, const BracketPattern& pattern,
                                      int shift, uint64_t n_max,
                                      const primes::PrimeTables& tables);

// Exact arc arithmetic scan of mu(A cap T^{-[n sqrt2]} A) for the rotation by
// 1/(2 sqrt2), A the arc (-width, width). Rows carry exact measures; odd rows
// with positive measure are collected separately as parity violations.
struct CounterexampleRow {
  uint64_t n = 0;
  int64_t bracket = 0;  // floor(n sqrt2)
  double measure = 0.0;
};
struct CounterexampleReport {
  std::vector<CounterexampleRow> rows;
  std::vector<uint64_t> odd_positive;  // odd n with measure > 0
  uint64_t even_positive = 0;          // count of even n with measure > 0
};
CounterexampleReport counterexample_scan(uint64_t n_max, double half_width = 0.125);

}  // namespace ulab::patterns
