#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "numeric/fft.hpp"
#include "numeric/layers.hpp"
#include "numeric/random.hpp"
#include "numeric/tensor.hpp"

namespace sf::spectral {

// idft(dft(w) * dft(y)), i.e. the circular convolution w * y.
std::vector<double> apply_filter(std::span<const double> w, std::span<const double> y);

struct FullSpectrumResult {
  std::vector<double> output;     // real part of the inverse transform
  double max_imag_residual = 0.0; // largest |imag| discarded
};

// Same product computed over all n complex bins of independently transformed
// w and y, inverted with a complex transform. The imaginary part that would
// be discarded measures how well conjugate symmetry survives the product.
FullSpectrumResult apply_filter_full_spectrum(std::span<const double> w, std::span<const double> y);

// |dft(w)| per stored bin.
std::vector<double> amplitude_spectrum(std::span<const double> w);

// Differentiable circular filter along the last axis of x: every row of
// x [..., n] is convolved with w [n]. Gradients flow to both x and w.
numeric::Tensor circular_filter(const numeric::Tensor& x, const numeric::Tensor& w);

// Learnable real-parameter frequency filter. The transfer function is the
// transform of the weights and is recomputed on every use.
class SpectralFilter {
 public:
  SpectralFilter() = default;
  // Near-identity start: w ~ N(0, init_std), then w[0] += 1.
  SpectralFilter(std::size_t length, numeric::Rng& rng, double init_std = 0.02);
  explicit SpectralFilter(std::vector<double> weights);

  std::size_t length() const { return weights_.numel(); }
  const numeric::Tensor& weights() const { return weights_; }

  numeric::Spectrum transfer() const;
  std::vector<double> amplitude_spectrum() const;

  // Plain-value application; throws InvalidArgument on length mismatch.
  std::vector<double> apply(std::span<const double> y) const;
  numeric::Tensor forward(const numeric::Tensor& x) const;

  void register_state(const std::string& prefix, numeric::StateRegistry& reg) const;

 private:
  numeric::Tensor weights_;
};

}  // namespace sf::spectral
