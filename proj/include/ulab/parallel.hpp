#pragma once

#include <atomic>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace ulab::parallel {

// Global worker cap, set once by the CLI (--threads). Zero means "hardware".
void set_max_threads(unsigned n);
unsigned max_threads();

// Runs fn(i) for i in [0, n). Work is split into contiguous blocks, one per
// worker; fn must write only to its own output slots. The partition affects
// scheduling only, never results.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

// Fixed-shape pairwise (tree) reduction. The result is a function of the
// values alone, so serial and parallel producers agree bit-for-bit.
template <typename T>
T pairwise_sum(std::span<const T> v) {
  if (v.size() <= 16) {
    T acc{};
    for (const T& x : v) acc += x;
    return acc;
  }
  const size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

template <typename T>
T pairwise_mean(std::span<const T> v) {
  return pairwise_sum(v) / static_cast<double>(v.size());
}

}  // namespace ulab::parallel
