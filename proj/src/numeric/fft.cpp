#include "numeric/fft.hpp"

#include <bit>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <unordered_map>

#include "errors.hpp"

namespace sf::numeric {
namespace {

// Iterative radix-2 transform for power-of-two lengths.
struct Radix2Plan {
  std::size_t n;
  std::vector<std::size_t> bitrev;
  std::vector<Complex> twiddle;  // exp(-2*pi*i*k/n), k < n/2

  explicit Radix2Plan(std::size_t size) : n(size), bitrev(size), twiddle(size / 2) {
    const int bits = std::countr_zero(size);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1U) << (bits - 1 - b);
      bitrev[i] = r;
    }
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddle[k] = Complex(std::cos(angle), std::sin(angle));
    }
  }

  void run(std::span<Complex> a, bool inverse) const {
    for (std::size_t i = 0; i < n; ++i) {
      if (i < bitrev[i]) std::swap(a[i], a[bitrev[i]]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t step = n / len;
      for (std::size_t start = 0; start < n; start += len) {
        for (std::size_t j = 0; j < half; ++j) {
          Complex w = twiddle[j * step];
          if (inverse) w = std::conj(w);
          const Complex u = a[start + j];
          const Complex v = a[start + j + half] * w;
          a[start + j] = u + v;
          a[start + j + half] = u - v;
        }
      }
    }
  }
};

// Chirp-z (Bluestein) transform for arbitrary lengths, built on a
// power-of-two convolution of size m >= 2n - 1.
struct BluesteinPlan {
  std::size_t n;
  std::size_t m;
  std::vector<Complex> chirp;          // exp(-i*pi*k^2/n)
  std::vector<Complex> kernel_fft;     // FFT of conj(chirp), wrapped
  std::shared_ptr<const Radix2Plan> inner;

  explicit BluesteinPlan(std::size_t size) : n(size), m(std::bit_ceil(2 * size - 1)), chirp(size) {
    inner = std::make_shared<Radix2Plan>(m);
    for (std::size_t k = 0; k < n; ++k) {
      // k^2 mod 2n keeps the angle argument small and exact.
      const std::size_t k2 = (k * k) % (2 * n);
      const double angle = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
      chirp[k] = Complex(std::cos(angle), std::sin(angle));
    }
    kernel_fft.assign(m, Complex(0.0, 0.0));
    kernel_fft[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) {
      kernel_fft[k] = std::conj(chirp[k]);
      kernel_fft[m - k] = std::conj(chirp[k]);
    }
    inner->run(kernel_fft, false);
  }

  void run(std::span<Complex> a, bool inverse) const {
    std::vector<Complex> work(m, Complex(0.0, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
      const Complex c = inverse ? std::conj(chirp[k]) : chirp[k];
      work[k] = a[k] * c;
    }
    inner->run(work, false);
    for (std::size_t k = 0; k < m; ++k) {
      work[k] *= inverse ? std::conj(kernel_fft[(m - k) % m]) : kernel_fft[k];
    }
    inner->run(work, true);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) {
      const Complex c = inverse ? std::conj(chirp[k]) : chirp[k];
      a[k] = work[k] * scale * c;
    }
  }
};

const Radix2Plan& radix2_plan(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<Radix2Plan>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Radix2Plan>(n);
  return *slot;
}

const BluesteinPlan& bluestein_plan(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<BluesteinPlan>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<BluesteinPlan>(n);
  return *slot;
}

}  // namespace

void Spectrum::validate() const {
  if (origin_length == 0) throw InvalidArgument("spectrum: origin length must be >= 1");
  if (bins.size() != bin_count(origin_length)) {
    throw InvalidArgument("spectrum: expected " + std::to_string(bin_count(origin_length)) +
                          " bins for length " + std::to_string(origin_length) + ", got " +
                          std::to_string(bins.size()));
  }
  if (bins.front().imag() != 0.0) {
    throw InvalidArgument("spectrum: DC bin must be real");
  }
  if (origin_length % 2 == 0 && bins.back().imag() != 0.0) {
    throw InvalidArgument("spectrum: Nyquist bin must be real for even length");
  }
}

void fft_inplace(std::span<Complex> data, bool inverse) {
  const std::size_t n = data.size();
  if (n == 0) throw InvalidArgument("fft: empty input");
  if (n == 1) return;
  if (std::has_single_bit(n)) {
    radix2_plan(n).run(data, inverse);
  } else {
    bluestein_plan(n).run(data, inverse);
  }
}

std::vector<Complex> fft(std::span<const Complex> x) {
  std::vector<Complex> out(x.begin(), x.end());
  fft_inplace(out, false);
  return out;
}

std::vector<Complex> ifft(std::span<const Complex> x) {
  std::vector<Complex> out(x.begin(), x.end());
  fft_inplace(out, true);
  const double scale = 1.0 / static_cast<double>(out.size());
  for (auto& v : out) v *= scale;
  return out;
}

Spectrum dft(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) throw InvalidArgument("dft: empty input");
  std::vector<Complex> work(x.begin(), x.end());
  fft_inplace(work, false);
  Spectrum s;
  s.origin_length = n;
  s.bins.assign(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(Spectrum::bin_count(n)));
  // These bins are real for real input; drop round-off.
  s.bins.front().imag(0.0);
  if (n % 2 == 0) s.bins.back().imag(0.0);
  return s;
}

std::vector<double> idft(const Spectrum& s) {
  s.validate();
  const std::size_t n = s.origin_length;
  std::vector<Complex> full(n);
  for (std::size_t k = 0; k < s.bins.size(); ++k) full[k] = s.bins[k];
  for (std::size_t k = s.bins.size(); k < n; ++k) full[k] = std::conj(s.bins[n - k]);
  fft_inplace(full, true);
  std::vector<double> out(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = full[i].real() * scale;
  return out;
}

Spectrum multiply(const Spectrum& a, const Spectrum& b) {
  if (a.origin_length != b.origin_length) {
    throw InvalidArgument("spectrum multiply: lengths " + std::to_string(a.origin_length) +
                          " and " + std::to_string(b.origin_length) + " differ");
  }
  Spectrum out{std::vector<Complex>(a.bins.size()), a.origin_length};
  for (std::size_t k = 0; k < a.bins.size(); ++k) out.bins[k] = a.bins[k] * b.bins[k];
  return out;
}

Spectrum multiply_conj(const Spectrum& a, const Spectrum& b) {
  if (a.origin_length != b.origin_length) {
    throw InvalidArgument("spectrum multiply: lengths " + std::to_string(a.origin_length) +
                          " and " + std::to_string(b.origin_length) + " differ");
  }
  Spectrum out{std::vector<Complex>(a.bins.size()), a.origin_length};
  for (std::size_t k = 0; k < a.bins.size(); ++k) out.bins[k] = a.bins[k] * std::conj(b.bins[k]);
  return out;
}

}  // namespace sf::numeric
