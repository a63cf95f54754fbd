#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ulab/primes.hpp"

namespace ulab::gowers {

using complexd = std::complex<double>;

// A function on {1..N}; values[i] is the value at n = i+1.
struct SequenceWindow {
  std::vector<complexd> values;
  size_t length() const { return values.size(); }
};

// A function on Z_M; index arithmetic is mod M.
struct CyclicSequence {
  std::vector<complexd> values;
  size_t modulus() const { return values.size(); }
};

struct GowersResult {
  int d = 0;
  size_t modulus = 0;
  double value = 0.0;
  uint64_t work = 0;  // multiply-add estimate
};

struct GowersOptions {
  double work_budget = 1e11;
};

// Pads the window into Z_{factor*N}: the window on {1..N}, zero elsewhere.
CyclicSequence embed_window(const SequenceWindow& window, unsigned factor);

// Inductive evaluator: U^1 = |E_n a(n)|,
// U^{d+1}(a) = (E_h U^d(a_h conj a)^{2^d})^{1/2^{d+1}}. 1 <= d <= 5.
GowersResult gowers_norm(const CyclicSequence& seq, int d, const GowersOptions& opt = {});

// Direct box-product expansion, the oracle for the inductive route.
// d <= 3 and M <= 256.
GowersResult gowers_norm_boxproduct(const CyclicSequence& seq, int d);

// U^2 via the fourth moment of the normalized Fourier coefficients.
GowersResult gowers_u2_spectral(const CyclicSequence& seq);

struct ScanRow {
  uint32_t w = 0;
  uint64_t W = 1;
  uint64_t N = 0;
  int d = 0;
  std::string weight_kind;
  double sup_norm = 0.0;
  uint64_t argmax_r = 0;
  double wall_ms = 0.0;  // zero unless timings were requested
};

struct ScanOptions {
  unsigned padding = 0;        // modulus = padding * N; 0 means padding = d
  const SequenceWindow* weight = nullptr;  // optional bounded multiplier
  std::string weight_kind = "ones";
  bool record_timings = false;
  GowersOptions gowers;
};

// For each (w, N): builds b(n) = (Lambda'_{w,r}(n) - 1) * weight(n) on [1,N]
// for every r in [1, W) coprime to W, embeds into Z_{padding*N}, takes U^d,
// and records the sup over r.
std::vector<ScanRow> mangoldt_uniformity_scan(const primes::PrimeTables& tables,
                                              std::span<const uint32_t> w_list,
                                              std::span<const uint64_t> N_list, int d,
                                              const ScanOptions& opt = {});

}  // namespace ulab::gowers
