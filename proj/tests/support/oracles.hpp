#pragma once

// Brute-force reference computations used as independent test oracles. Kept
// free of any dependency on the library's transform or filter code.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace sf::testing {

// O(n^2) forward transform, all n bins.
inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t m = 0; m < n; ++m) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((m * k) % n) / static_cast<double>(n);
      acc += x[m] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

// out[m] = sum_j w[j] * y[(m - j) mod n]
inline std::vector<double> circular_convolution(const std::vector<double>& w, const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t j = 0; j < n; ++j) out[m] += w[j] * y[(m + n - j) % n];
  }
  return out;
}

inline std::vector<double> rotate_right(const std::vector<double>& y, std::size_t s) {
  const std::size_t n = y.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[(i + s) % n] = y[i];
  return out;
}

}  // namespace sf::testing
