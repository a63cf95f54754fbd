#include "ulab/primes.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "ulab/errors.hpp"
#include "ulab/parallel.hpp"

namespace ulab::primes {

namespace {

constexpr char kCacheMagic[] = "ULAB-SIEVE-1";
constexpr uint64_t kSegmentBits = 1u << 20;  // numbers per sieve segment

std::vector<uint64_t> small_primes(uint64_t limit) {
  std::vector<uint8_t> mark(limit + 1, 1);
  std::vector<uint64_t> primes;
  for (uint64_t i = 2; i <= limit; ++i) {
    if (!mark[i]) continue;
    primes.push_back(i);
    for (uint64_t j = i * i; j <= limit; j += i) mark[j] = 0;
  }
  return primes;
}

}  // namespace

void PrimeTables::rebuild_counts() {
  const size_t words = bits_.size();
  const size_t blocks = (words + 63) / 64;
  block_count_.assign(blocks + 1, 0);
  uint64_t acc = 0;
  for (size_t b = 0; b < blocks; ++b) {
    block_count_[b] = acc;
    const size_t end = std::min(words, (b + 1) * 64);
    for (size_t wi = b * 64; wi < end; ++wi) acc += std::popcount(bits_[wi]);
  }
  block_count_[blocks] = acc;
}

uint64_t PrimeTables::pi(uint64_t n) const {
  if (n > limit_) throw invalid_argument("pi: n exceeds sieve limit");
  if (n < 2) return 0;
  const uint64_t block = n / kBlockNumbers;
  uint64_t count = block_count_[block];
  const uint64_t word_of_n = n >> 6;
  for (uint64_t wi = block * 64; wi < word_of_n; ++wi) count += std::popcount(bits_[wi]);
  const uint64_t mask = (n & 63) == 63 ? ~0ull : ((1ull << ((n & 63) + 1)) - 1);
  count += std::popcount(bits_[word_of_n] & mask);
  return count;
}

uint64_t PrimeTables::popcount() const {
  uint64_t acc = 0;
  for (uint64_t w : bits_) acc += std::popcount(w);
  return acc;
}

double PrimeTables::mangoldt(uint64_t n) const {
  if (n > limit_) throw invalid_argument("mangoldt: n exceeds sieve limit");
  if (n < 2) return 0.0;
  if (is_prime(n)) return std::log(static_cast<double>(n));
  // Composite: Lambda(n) = log p iff n is a power of its unique prime factor.
  uint64_t p = 0;
  if (n % 2 == 0) {
    p = 2;
  } else {
    for (uint64_t d = 3; d * d <= n; d += 2) {
      if (n % d == 0) {
        p = d;
        break;
      }
    }
  }
  if (p == 0) return 0.0;  // unreachable: composite has a factor <= sqrt(n)
  uint64_t m = n;
  while (m % p == 0) m /= p;
  return m == 1 ? std::log(static_cast<double>(p)) : 0.0;
}

std::vector<uint64_t> PrimeTables::primes_up_to(uint64_t n) const {
  if (n > limit_) throw invalid_argument("primes_up_to: n exceeds sieve limit");
  std::vector<uint64_t> out;
  out.reserve(static_cast<size_t>(n > 16 ? 1.2 * n / std::log(static_cast<double>(n)) : 8));
  for (uint64_t i = 2; i <= n; ++i)
    if (is_prime(i)) out.push_back(i);
  return out;
}

PrimeTables build_tables(uint64_t limit) {
  if (limit < 2) throw invalid_argument("build_tables: limit must be >= 2");
  PrimeTables t;
  t.limit_ = limit;
  t.bits_.assign((limit >> 6) + 1, 0);

  const auto base = small_primes(static_cast<uint64_t>(std::sqrt(static_cast<double>(limit))) + 1);

  // Segments are word-aligned, so workers touch disjoint words.
  const uint64_t n_segments = (limit + kSegmentBits) / kSegmentBits;
  parallel::parallel_for(n_segments, [&](size_t seg) {
    const uint64_t lo = seg * kSegmentBits;
    const uint64_t hi = std::min(limit, lo + kSegmentBits - 1);
    std::vector<uint8_t> mark(hi - lo + 1, 1);
    for (uint64_t p : base) {
      if (p * p > hi) break;
      uint64_t start = std::max(p * p, ((lo + p - 1) / p) * p);
      for (uint64_t j = start; j <= hi; j += p) mark[j - lo] = 0;
    }
    for (uint64_t n = std::max<uint64_t>(lo, 2); n <= hi; ++n)
      if (mark[n - lo]) t.bits_[n >> 6] |= 1ull << (n & 63);
  });

  t.rebuild_counts();
  return t;
}

double lambda_prime(const PrimeTables& tables, uint64_t n) {
  if (n < 1 || n > tables.limit()) throw invalid_argument("lambda_prime: n out of sieve range");
  return tables.is_prime(n) ? std::log(static_cast<double>(n)) : 0.0;
}

uint64_t euler_phi(uint64_t n) {
  if (n < 1) throw invalid_argument("euler_phi: n must be >= 1");
  uint64_t result = n, m = n;
  for (uint64_t p = 2; p * p <= m; p += (p == 2 ? 1 : 2)) {
    if (m % p) continue;
    result -= result / p;
    while (m % p == 0) m /= p;
  }
  if (m > 1) result -= result / m;
  return result;
}

WTrickParams WTrickParams::make(uint32_t w, uint64_t r, const PrimeTables& tables) {
  if (w <= 2) throw invalid_argument("WTrickParams: w must exceed 2");
  if (tables.limit() < w) throw invalid_argument("WTrickParams: sieve smaller than w");
  WTrickParams p;
  p.w = w;
  p.W = 1;
  for (uint64_t q = 2; q < w; ++q)
    if (tables.is_prime(q)) p.W *= q;
  if (r < 1 || r > p.W) throw invalid_argument("WTrickParams: r must lie in [1, W]");
  if (std::gcd(r, p.W) != 1) throw invalid_argument("WTrickParams: gcd(r, W) must be 1");
  p.r = r;
  p.phi_W = euler_phi(p.W);
  return p;
}

double modified_mangoldt(const PrimeTables& tables, const WTrickParams& params, uint64_t n) {
  const uint64_t m = params.W * n + params.r;
  if (m > tables.limit()) {
    throw invalid_argument("modified_mangoldt: sieve limit " + std::to_string(tables.limit()) +
                           " too small, need at least " + std::to_string(m));
  }
  return static_cast<double>(params.phi_W) / static_cast<double>(params.W) *
         lambda_prime(tables, m);
}

std::vector<uint64_t> shifted_primes(const PrimeTables& tables, int shift, uint64_t N) {
  if (shift != 1 && shift != -1) throw invalid_argument("shifted_primes: shift must be +1 or -1");
  if (N + 1 > tables.limit()) throw invalid_argument("shifted_primes: need sieve limit >= N + 1");
  std::vector<uint64_t> out;
  for (uint64_t p = 2; p <= N; ++p) {
    if (!tables.is_prime(p)) continue;
    const int64_t v = static_cast<int64_t>(p) + shift;
    if (v >= 1) out.push_back(static_cast<uint64_t>(v));
  }
  return out;
}

void save_cache(const PrimeTables& tables, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("save_cache: cannot open " + path);
  f.write(kCacheMagic, sizeof(kCacheMagic) - 1);
  const uint64_t limit = tables.limit();
  char le[8];
  for (int i = 0; i < 8; ++i) le[i] = static_cast<char>((limit >> (8 * i)) & 0xff);
  f.write(le, 8);
  f.write(reinterpret_cast<const char*>(tables.bits().data()),
          static_cast<std::streamsize>(tables.bits().size() * 8));
  if (!f) throw io_error("save_cache: write failed for " + path);
}

std::optional<PrimeTables> load_cache(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return std::nullopt;
  char magic[sizeof(kCacheMagic) - 1];
  if (!f.read(magic, sizeof(magic)) || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0)
    return std::nullopt;
  char le[8];
  if (!f.read(le, 8)) return std::nullopt;
  uint64_t limit = 0;
  for (int i = 0; i < 8; ++i) limit |= static_cast<uint64_t>(static_cast<uint8_t>(le[i])) << (8 * i);
  if (limit < 2) return std::nullopt;
  PrimeTables t;
  t.limit_ = limit;
  t.bits_.assign((limit >> 6) + 1, 0);
  if (!f.read(reinterpret_cast<char*>(t.bits_.data()),
              static_cast<std::streamsize>(t.bits_.size() * 8)))
    return std::nullopt;
  t.rebuild_counts();
  return t;
}

}  // namespace ulab::primes
