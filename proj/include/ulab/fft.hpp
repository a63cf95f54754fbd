#pragma once

#include <complex>
#include <vector>

namespace ulab::fft {

// In-place iterative radix-2 FFT; size must be a power of two.
void transform(std::vector<std::complex<double>>& a, bool inverse);

// Direct O(M^2) DFT for arbitrary sizes (oracle scale). Forward sign
// convention e(-nk/M), unnormalized.
std::vector<std::complex<double>> dft_naive(const std::vector<std::complex<double>>& a);

bool is_power_of_two(size_t n);

}  // namespace ulab::fft
