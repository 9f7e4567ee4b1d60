#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace sf::numeric {

using Complex = std::complex<double>;

// Half-complex transform of a real sequence of length `origin_length`:
// bins[k] for k = 0..floor(n/2). The remaining bins follow from conjugate
// symmetry and are never stored.
struct Spectrum {
  std::vector<Complex> bins;
  std::size_t origin_length = 0;

  static std::size_t bin_count(std::size_t n) { return n / 2 + 1; }

  // Throws InvalidArgument if the bin count does not match origin_length or
  // the DC (and, for even n, Nyquist) bin carries an imaginary part.
  void validate() const;
};

// In-place complex transform of any length >= 1. Forward uses exp(-i...),
// inverse uses exp(+i...); neither applies the 1/n factor.
void fft_inplace(std::span<Complex> data, bool inverse);

std::vector<Complex> fft(std::span<const Complex> x);
std::vector<Complex> ifft(std::span<const Complex> x);  // includes 1/n

// Real forward transform, Hermitian half only.
Spectrum dft(std::span<const double> x);

// Inverse of dft(): expands the stored half and returns the real sequence.
std::vector<double> idft(const Spectrum& s);

// Per-bin complex product; both operands must have the same origin length.
Spectrum multiply(const Spectrum& a, const Spectrum& b);

// Per-bin a * conj(b).
Spectrum multiply_conj(const Spectrum& a, const Spectrum& b);

}  // namespace sf::numeric
