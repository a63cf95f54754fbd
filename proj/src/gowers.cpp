#include "ulab/gowers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "ulab/errors.hpp"
#include "ulab/fft.hpp"
#include "ulab/parallel.hpp"

namespace ulab::gowers {

namespace {

double pow2_root(double x, int d) {
  // x^(1/2^d), clamping the tiny negatives rounding can produce.
  double v = std::max(x, 0.0);
  for (int i = 0; i < d; ++i) v = std::sqrt(v);
  return v;
}

// ||a||_{U^d}^{2^d}. Per-depth scratch buffers live in thread-local stacks so
// recursion and the top-level h parallelism never allocate in the hot loop.
double u_pow(std::span<const complexd> a, int d, size_t depth) {
  const size_t m = a.size();
  if (d == 1) {
    const complexd mean = parallel::pairwise_mean(a);
    return std::norm(mean);
  }
  // Fixed-size stacks: d <= 5 bounds the depth, and growing the outer vector
  // mid-recursion would invalidate the caller's buffer reference.
  thread_local std::vector<std::vector<complexd>> diff_stack(8);
  thread_local std::vector<std::vector<double>> perh_stack(8);
  auto& diff = diff_stack.at(depth);
  auto& per_h = perh_stack.at(depth);
  diff.resize(m);
  per_h.resize(m);
  for (size_t h = 0; h < m; ++h) {
    for (size_t n = 0; n < m; ++n) diff[n] = a[(n + h) % m] * std::conj(a[n]);
    per_h[h] = u_pow(diff, d - 1, depth + 1);
  }
  return parallel::pairwise_sum(std::span<const double>(per_h)) / static_cast<double>(m);
}

}  // namespace

CyclicSequence embed_window(const SequenceWindow& window, unsigned factor) {
  if (factor < 2) throw invalid_argument("embed_window: padding factor must be >= 2");
  if (window.length() == 0) throw invalid_argument("embed_window: empty window");
  CyclicSequence seq;
  seq.values.assign(window.length() * factor, complexd{0.0, 0.0});
  std::copy(window.values.begin(), window.values.end(), seq.values.begin());
  return seq;
}

GowersResult gowers_norm(const CyclicSequence& seq, int d, const GowersOptions& opt) {
  const size_t m = seq.modulus();
  if (m == 0) throw invalid_argument("gowers_norm: empty sequence");
  if (d < 1 || d > 5) throw invalid_argument("gowers_norm: d must lie in [1, 5]");
  const double est = std::pow(static_cast<double>(m), d);
  if (est > opt.work_budget)
    throw resource_error("gowers_norm: estimated work " + std::to_string(est) +
                         " exceeds budget " + std::to_string(opt.work_budget));

  GowersResult res;
  res.d = d;
  res.modulus = m;
  res.work = static_cast<uint64_t>(est);

  if (d == 1) {
    const complexd mean = parallel::pairwise_mean(std::span<const complexd>(seq.values));
    res.value = std::abs(mean);
    return res;
  }

  // Parallel over h at the top level only; per-h results land in slots and are
  // reduced in index order, so thread count never changes the value.
  std::vector<double> per_h(m);
  parallel::parallel_for(m, [&](size_t h) {
    thread_local std::vector<complexd> diff;
    diff.resize(m);
    for (size_t n = 0; n < m; ++n) diff[n] = seq.values[(n + h) % m] * std::conj(seq.values[n]);
    per_h[h] = u_pow(diff, d - 1, 0);
  });
  const double mean = parallel::pairwise_sum(std::span<const double>(per_h)) / static_cast<double>(m);
  res.value = pow2_root(mean, d);
  return res;
}

GowersResult gowers_norm_boxproduct(const CyclicSequence& seq, int d) {
  const size_t m = seq.modulus();
  if (m == 0) throw invalid_argument("gowers_norm_boxproduct: empty sequence");
  if (d < 1 || d > 3) throw invalid_argument("gowers_norm_boxproduct: oracle supports d <= 3");
  if (m > 256) throw resource_error("gowers_norm_boxproduct: oracle scale is M <= 256");
  const auto& a = seq.values;
  GowersResult res;
  res.d = d;
  res.modulus = m;
  res.work = static_cast<uint64_t>(std::pow(static_cast<double>(m), d + 1));

  // E_{n,h_1..h_d} prod_{eps} C^{|eps|} a(n + eps . h); means nested with a
  // fixed pairwise shape per level.
  std::vector<double> lvl1(m);
  if (d == 1) {
    for (size_t h = 0; h < m; ++h) {
      std::vector<complexd> terms(m);
      for (size_t n = 0; n < m; ++n) terms[n] = a[n] * std::conj(a[(n + h) % m]);
      lvl1[h] = parallel::pairwise_mean(std::span<const complexd>(terms)).real();
    }
  } else if (d == 2) {
    for (size_t h1 = 0; h1 < m; ++h1) {
      std::vector<double> lvl2(m);
      for (size_t h2 = 0; h2 < m; ++h2) {
        std::vector<complexd> terms(m);
        for (size_t n = 0; n < m; ++n) {
          terms[n] = a[n] * std::conj(a[(n + h1) % m]) * std::conj(a[(n + h2) % m]) *
                     a[(n + h1 + h2) % m];
        }
        lvl2[h2] = parallel::pairwise_mean(std::span<const complexd>(terms)).real();
      }
      lvl1[h1] = parallel::pairwise_mean(std::span<const double>(lvl2));
    }
  } else {
    parallel::parallel_for(m, [&](size_t h1) {
      std::vector<double> lvl2(m);
      std::vector<double> lvl3(m);
      std::vector<complexd> terms(m);
      for (size_t h2 = 0; h2 < m; ++h2) {
        for (size_t h3 = 0; h3 < m; ++h3) {
          for (size_t n = 0; n < m; ++n) {
            const complexd t0 = a[n] * std::conj(a[(n + h1) % m]) * std::conj(a[(n + h2) % m]) *
                                a[(n + h1 + h2) % m];
            const complexd t1 = std::conj(a[(n + h3) % m]) * a[(n + h1 + h3) % m] *
                                a[(n + h2 + h3) % m] * std::conj(a[(n + h1 + h2 + h3) % m]);
            terms[n] = t0 * t1;
          }
          lvl3[h3] = parallel::pairwise_mean(std::span<const complexd>(terms)).real();
        }
        lvl2[h2] = parallel::pairwise_mean(std::span<const double>(lvl3));
      }
      lvl1[h1] = parallel::pairwise_mean(std::span<const double>(lvl2));
    });
  }
  const double mean = parallel::pairwise_mean(std::span<const double>(lvl1));
  res.value = pow2_root(mean, d);
  return res;
}

GowersResult gowers_u2_spectral(const CyclicSequence& seq) {
  const size_t m = seq.modulus();
  if (m == 0) throw invalid_argument("gowers_u2_spectral: empty sequence");
  std::vector<complexd> hat = seq.values;
  if (fft::is_power_of_two(m)) {
    fft::transform(hat, false);
  } else {
    hat = fft::dft_naive(hat);
  }
  std::vector<double> fourth(m);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (size_t i = 0; i < m; ++i) {
    const double p = std::norm(hat[i] * inv_m);
    fourth[i] = p * p;
  }
  GowersResult res;
  res.d = 2;
  res.modulus = m;
  res.work = static_cast<uint64_t>(m) * (fft::is_power_of_two(m) ? 64 : m);
  res.value = pow2_root(parallel::pairwise_sum(std::span<const double>(fourth)), 2);
  return res;
}

std::vector<ScanRow> mangoldt_uniformity_scan(const primes::PrimeTables& tables,
                                              std::span<const uint32_t> w_list,
                                              std::span<const uint64_t> N_list, int d,
                                              const ScanOptions& opt) {
  if (d < 1 || d > 3) throw invalid_argument("mangoldt_uniformity_scan: d must lie in [1, 3]");
  const unsigned padding = opt.padding == 0 ? static_cast<unsigned>(d) : opt.padding;
  if (padding < 2) throw invalid_argument("mangoldt_uniformity_scan: padding factor must be >= 2");

  uint64_t max_N = 0;
  for (uint64_t N : N_list) max_N = std::max(max_N, N);
  if (opt.weight && opt.weight->length() < max_N)
    throw invalid_argument("mangoldt_uniformity_scan: weight window shorter than max N");

  std::vector<ScanRow> rows;
  for (uint32_t w : w_list) {
    const auto params0 = primes::WTrickParams::make(w, 1, tables);
    const uint64_t W = params0.W;
    for (uint64_t N : N_list) {
      const uint64_t need = W * N + W;
      if (need > tables.limit())
        throw resource_error("mangoldt_uniformity_scan: sieve limit " +
                             std::to_string(tables.limit()) + " too small, need " +
                             std::to_string(need));
      const auto t0 = std::chrono::steady_clock::now();
      ScanRow row;
      row.w = w;
      row.W = W;
      row.N = N;
      row.d = d;
      row.weight_kind = opt.weight_kind;

      std::vector<uint64_t> residues;
      for (uint64_t r = 1; r < W; ++r)
        if (std::gcd(r, W) == 1) residues.push_back(r);
      if (W == 1) residues.push_back(1);

      std::vector<double> norms(residues.size());
      parallel::parallel_for(residues.size(), [&](size_t ri) {
        const auto params = primes::WTrickParams::make(w, residues[ri], tables);
        SequenceWindow win;
        win.values.resize(N);
        for (uint64_t n = 1; n <= N; ++n) {
          double b = primes::modified_mangoldt(tables, params, n) - 1.0;
          complexd v{b, 0.0};
          if (opt.weight) v *= opt.weight->values[n - 1];
          win.values[n - 1] = v;
        }
        const CyclicSequence seq = embed_window(win, padding);
        const GowersResult g =
            d == 2 ? gowers_u2_spectral(seq) : gowers_norm(seq, d, opt.gowers);
        norms[ri] = g.value;
      });

      row.sup_norm = 0.0;
      row.argmax_r = residues.empty() ? 0 : residues[0];
      for (size_t i = 0; i < norms.size(); ++i) {
        if (norms[i] > row.sup_norm) {
          row.sup_norm = norms[i];
          row.argmax_r = residues[i];
        }
      }
      if (opt.record_timings) {
        const auto t1 = std::chrono::steady_clock::now();
        row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace ulab::gowers
