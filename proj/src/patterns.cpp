#include "ulab/patterns.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <random>
#include <sstream>

#include "ulab/errors.hpp"
#include "ulab/parallel.hpp"

namespace ulab::patterns {

namespace {

// candidates &= candidates-of(set >> a): keeps m with m + a in the set.
void and_shifted(std::vector<uint64_t>& acc, const std::vector<uint64_t>& bits, uint64_t a) {
  const uint64_t words = acc.size();
  const uint64_t word_shift = a >> 6;
  const unsigned bit_shift = static_cast<unsigned>(a & 63);
  for (uint64_t i = 0; i < words; ++i) {
    uint64_t v = 0;
    const uint64_t j = i + word_shift;
    if (j < words) {
      v = bits[j] >> bit_shift;
      if (bit_shift != 0 && j + 1 < words) v |= bits[j + 1] << (64 - bit_shift);
    }
    acc[i] &= v;
  }
}

}  // namespace

IntegerSet IntegerSet::full(uint64_t N) {
  IntegerSet s;
  s.n_ = N;
  s.bits_.assign((N >> 6) + 1, 0);
  for (uint64_t v = 1; v <= N; ++v) s.bits_[v >> 6] |= 1ull << (v & 63);
  s.source_ = "full";
  return s;
}

IntegerSet IntegerSet::evens(uint64_t N) {
  IntegerSet s;
  s.n_ = N;
  s.bits_.assign((N >> 6) + 1, 0);
  for (uint64_t v = 2; v <= N; v += 2) s.bits_[v >> 6] |= 1ull << (v & 63);
  s.source_ = "evens";
  return s;
}

IntegerSet IntegerSet::bernoulli(uint64_t N, double density, uint64_t seed) {
  if (!(density > 0.0) || !(density < 1.0))
    throw invalid_argument("IntegerSet::bernoulli: density must lie in (0,1)");
  IntegerSet s;
  s.n_ = N;
  s.bits_.assign((N >> 6) + 1, 0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (uint64_t v = 1; v <= N; ++v)
    if (u(rng) < density) s.bits_[v >> 6] |= 1ull << (v & 63);
  std::ostringstream label;
  label << "bernoulli(p=" << density << ",seed=" << seed << ")";
  s.source_ = label.str();
  return s;
}

IntegerSet IntegerSet::orbit_hits(uint64_t N, const sequences::Irrational& alpha,
                                  const systems::CircleSet& set) {
  IntegerSet s;
  s.n_ = N;
  s.bits_.assign((N >> 6) + 1, 0);
  for (uint64_t v = 1; v <= N; ++v)
    if (set.contains(alpha.frac_bits(v))) s.bits_[v >> 6] |= 1ull << (v & 63);
  s.source_ = "orbit(" + alpha.label() + ")";
  return s;
}

IntegerSet IntegerSet::from_members(uint64_t N, std::span<const uint64_t> members,
                                    std::string source) {
  IntegerSet s;
  s.n_ = N;
  s.bits_.assign((N >> 6) + 1, 0);
  for (uint64_t v : members) {
    if (v < 1 || v > N) throw invalid_argument("IntegerSet: member out of [1, N]");
    s.bits_[v >> 6] |= 1ull << (v & 63);
  }
  s.source_ = std::move(source);
  return s;
}

IntegerSet IntegerSet::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("IntegerSet::load: cannot open " + path);
  std::string header;
  std::getline(f, header);
  uint64_t N = 0;
  if (header.rfind("# ulab-set v1 N=", 0) != 0 ||
      sscanf(header.c_str(), "# ulab-set v1 N=%lu", &N) != 1 || N == 0)
    throw io_error("IntegerSet::load: bad header in " + path);
  std::vector<uint64_t> members;
  uint64_t v;
  while (f >> v) members.push_back(v);
  return from_members(N, members, "file:" + path);
}

void IntegerSet::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw io_error("IntegerSet::save: cannot open " + path);
  f << "# ulab-set v1 N=" << n_ << "\n";
  for (uint64_t v = 1; v <= n_; ++v)
    if (contains(v)) f << v << "\n";
}

uint64_t IntegerSet::count() const {
  uint64_t c = 0;
  for (uint64_t w : bits_) c += std::popcount(w);
  return c;
}

void IntegerSet::insert(uint64_t v) {
  if (v < 1 || v > n_) throw invalid_argument("IntegerSet::insert: out of range");
  bits_[v >> 6] |= 1ull << (v & 63);
}

std::vector<DensityPoint> upper_density_profile(const IntegerSet& set,
                                                std::span<const uint64_t> window_sizes) {
  const uint64_t N = set.N();
  std::vector<uint64_t> prefix(N + 1, 0);
  for (uint64_t v = 1; v <= N; ++v) prefix[v] = prefix[v - 1] + (set.contains(v) ? 1 : 0);
  std::vector<DensityPoint> out;
  for (uint64_t L : window_sizes) {
    if (L < 1 || L > N) throw invalid_argument("upper_density_profile: window size out of [1, N]");
    uint64_t best = 0;
    for (uint64_t start = 1; start + L - 1 <= N; ++start)
      best = std::max(best, prefix[start + L - 1] - prefix[start - 1]);
    out.push_back({L, static_cast<double>(best) / static_cast<double>(L)});
  }
  return out;
}

std::optional<PatternWitness> find_pattern(const IntegerSet& set, const BracketPattern& pattern,
                                           int shift, uint64_t n_max,
                                           const primes::PrimeTables& tables) {
  // n = p + shift <= n_max, so primes run up to n_max - shift.
  const uint64_t p_max = shift < 0 ? n_max + 1 : n_max - 1;
  const auto ns = primes::shifted_primes(tables, shift, p_max);
  std::vector<uint64_t> acc;
  for (uint64_t n : ns) {
    if (n == 0 || n > n_max) continue;
    const auto exps = sequences::bracket_exponents(pattern, n);
    if (exps.back() < 0 || static_cast<uint64_t>(exps.back()) >= set.N()) continue;
    acc = set.bits();
    for (int64_t a : exps) and_shifted(acc, set.bits(), static_cast<uint64_t>(a));
    for (size_t w = 0; w < acc.size(); ++w) {
      if (acc[w] == 0) continue;
      const uint64_t m = (w << 6) + static_cast<uint64_t>(std::countr_zero(acc[w]));
      if (m < 1 || m > set.N()) continue;
      PatternWitness wit;
      wit.m = m;
      wit.n = n;
      wit.p = static_cast<uint64_t>(static_cast<int64_t>(n) - shift);
      wit.positions.push_back(m);
      for (int64_t a : exps) wit.positions.push_back(m + static_cast<uint64_t>(a));
      // Self-check against the raw bits and the sieve before returning.
      if (!tables.is_prime(wit.p)) throw precision_error("find_pattern: witness p not prime");
      for (uint64_t pos : wit.positions)
        if (!set.contains(pos)) throw precision_error("find_pattern: witness position not in set");
      return wit;
    }
  }
  return std::nullopt;
}

std::vector<CensusRow> pattern_census(const IntegerSet& set, const BracketPattern& pattern,
                                      int shift, uint64_t n_max,
                                      const primes::PrimeTables& tables) {
  const uint64_t p_max = shift < 0 ? n_max + 1 : n_max - 1;
  const auto ns = primes::shifted_primes(tables, shift, p_max);
  std::vector<uint64_t> valid;
  for (uint64_t n : ns)
    if (n >= 1 && n <= n_max) valid.push_back(n);
  std::vector<CensusRow> rows(valid.size());
  parallel::parallel_for(valid.size(), [&](size_t i) {
    const uint64_t n = valid[i];
    CensusRow row;
    row.n = n;
    row.p = static_cast<uint64_t>(static_cast<int64_t>(n) - shift);
    const auto exps = sequences::bracket_exponents(pattern, n);
    if (exps.back() >= 0 && static_cast<uint64_t>(exps.back()) < set.N()) {
      std::vector<uint64_t> acc = set.bits();
      for (int64_t a : exps) and_shifted(acc, set.bits(), static_cast<uint64_t>(a));
      // Bit 0 (no member 0) never survives: m >= 1 by construction of the set.
      uint64_t c = 0;
      for (uint64_t w : acc) c += std::popcount(w);
      row.count = c;
    }
    row.density_estimate = static_cast<double>(row.count) / static_cast<double>(set.N());
    rows[i] = row;
  });
  return rows;
}

CounterexampleReport counterexample_scan(uint64_t n_max, double half_width) {
  if (!(half_width > 0.0) || half_width >= 0.5)
    throw invalid_argument("counterexample_scan: half_width must lie in (0, 0.5)");
  const auto sqrt2 = sequences::Irrational::sqrt_of(2);
  const auto step = sequences::Irrational::named("inv2sqrt2");  // rotation 1/(2 sqrt2)
  const auto rotation = systems::RotationSystem::circle(step);
  const auto A = systems::CircleSet::interval(-half_width, half_width);

  CounterexampleReport rep;
  rep.rows.resize(n_max);
  parallel::parallel_for(n_max, [&](size_t idx) {
    const uint64_t n = idx + 1;
    const int64_t m = sqrt2.floor_times(n);
    const auto shifted = systems::rotate_set(rotation, A, m);
    const systems::CircleSet* sets[2] = {&A, &shifted};
    rep.rows[idx] = {n, m, systems::CircleSet::intersection_measure(sets)};
  });
  for (const auto& row : rep.rows) {
    if (row.measure > 0.0) {
      if (row.n % 2 == 1)
        rep.odd_positive.push_back(row.n);
      else
        ++rep.even_positive;
    }
  }
  return rep;
}

}  // namespace ulab::patterns
