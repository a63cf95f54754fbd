#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ulab::primes {

// Sieve-backed prime tables: primality bits, block-sampled prime counts, and
// von Mangoldt values computed on demand from the bits.
class PrimeTables {
 public:
  static constexpr uint64_t kBlockNumbers = 4096;  // 64 words per count block

  uint64_t limit() const { return limit_; }
  bool is_prime(uint64_t n) const {
    return n <= limit_ && n >= 2 && (bits_[n >> 6] >> (n & 63)) & 1;
  }
  // pi(n) = #{p <= n prime}
  uint64_t pi(uint64_t n) const;
  // log p when n = p^e (e >= 1), else 0
  double mangoldt(uint64_t n) const;

  std::vector<uint64_t> primes_up_to(uint64_t n) const;
  uint64_t popcount() const;

  const std::vector<uint64_t>& bits() const { return bits_; }

 private:
  friend PrimeTables build_tables(uint64_t);
  friend std::optional<PrimeTables> load_cache(const std::string&);
  void rebuild_counts();

  uint64_t limit_ = 0;
  std::vector<uint64_t> bits_;         // bit n set iff n prime, n in [0, limit]
  std::vector<uint64_t> block_count_;  // primes below each 4096-aligned block
};

// Segmented sieve of Eratosthenes up to `limit` (inclusive). limit >= 2.
PrimeTables build_tables(uint64_t limit);

// 1_P(n) * Lambda(n): log n on primes, 0 elsewhere (prime powers included).
double lambda_prime(const PrimeTables& tables, uint64_t n);

// Standard Euler totient: #{1 <= d <= n : gcd(d, n) = 1}.
uint64_t euler_phi(uint64_t n);

// W-trick parameters: W is the primorial of primes below w, r a reduced residue.
struct WTrickParams {
  uint32_t w = 0;
  uint64_t W = 1;
  uint64_t r = 1;
  uint64_t phi_W = 1;

  // Validates w > 2, gcd(r, W) = 1, and W against the sieve.
  static WTrickParams make(uint32_t w, uint64_t r, const PrimeTables& tables);
};

// (phi(W)/W) * lambda_prime(W*n + r). Requires W*n + r <= tables.limit().
double modified_mangoldt(const PrimeTables& tables, const WTrickParams& params, uint64_t n);

// Ascending {p + shift : p prime <= N, p + shift >= 1}, shift in {-1, +1}.
std::vector<uint64_t> shifted_primes(const PrimeTables& tables, int shift, uint64_t N);

// Binary cache: magic "ULAB-SIEVE-1", 8-byte little-endian limit, then the bits.
void save_cache(const PrimeTables& tables, const std::string& path);
std::optional<PrimeTables> load_cache(const std::string& path);

}  // namespace ulab::primes
