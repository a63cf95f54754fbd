#include "ulab/fft.hpp"

#include <cmath>

#include "ulab/errors.hpp"

namespace ulab::fft {

bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void transform(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  if (!is_power_of_two(n)) throw invalid_argument("fft: size must be a power of two");
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        const auto u = a[i + j];
        const auto v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse)
    for (auto& x : a) x /= static_cast<double>(n);
}

std::vector<std::complex<double>> dft_naive(const std::vector<std::complex<double>>& a) {
  const size_t m = a.size();
  std::vector<std::complex<double>> table(m), out(m);
  for (size_t j = 0; j < m; ++j) {
    const double ang = -2.0 * M_PI * static_cast<double>(j) / static_cast<double>(m);
    table[j] = {std::cos(ang), std::sin(ang)};
  }
  for (size_t k = 0; k < m; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (size_t n2 = 0; n2 < m; ++n2) acc += a[n2] * table[(n2 * k) % m];
    out[k] = acc;
  }
  return out;
}

}  // namespace ulab::fft
