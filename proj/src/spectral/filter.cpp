#include "spectral/filter.hpp"

#include <cmath>
#include <memory>

#include "errors.hpp"

namespace sf::spectral {

using numeric::Complex;
using numeric::Spectrum;
using numeric::Tensor;

namespace {

void check_lengths(std::size_t w, std::size_t y) {
  if (w != y) {
    throw InvalidArgument("filter: weights have length " + std::to_string(w) + " but signal has " +
                          std::to_string(y));
  }
  if (w == 0) throw InvalidArgument("filter: empty signal");
}

}  // namespace

std::vector<double> apply_filter(std::span<const double> w, std::span<const double> y) {
  check_lengths(w.size(), y.size());
  return numeric::idft(numeric::multiply(numeric::dft(w), numeric::dft(y)));
}

FullSpectrumResult apply_filter_full_spectrum(std::span<const double> w, std::span<const double> y) {
  check_lengths(w.size(), y.size());
  const std::vector<Complex> wc(w.begin(), w.end());
  const std::vector<Complex> yc(y.begin(), y.end());
  auto wf = numeric::fft(wc);
  const auto yf = numeric::fft(yc);
  for (std::size_t k = 0; k < wf.size(); ++k) wf[k] *= yf[k];
  const auto back = numeric::ifft(wf);
  FullSpectrumResult r;
  r.output.resize(back.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    r.output[i] = back[i].real();
    r.max_imag_residual = std::max(r.max_imag_residual, std::fabs(back[i].imag()));
  }
  return r;
}

std::vector<double> amplitude_spectrum(std::span<const double> w) {
  const auto s = numeric::dft(w);
  std::vector<double> amp(s.bins.size());
  for (std::size_t k = 0; k < amp.size(); ++k) amp[k] = std::abs(s.bins[k]);
  return amp;
}

Tensor circular_filter(const Tensor& x, const Tensor& w) {
  if (w.rank() != 1 || x.rank() == 0 || x.shape().back() != w.numel()) {
    throw InvalidArgument("circular_filter: signal shape " + numeric::to_string(x.shape()) +
                          " does not match filter shape " + numeric::to_string(w.shape()));
  }
  const std::size_t n = w.numel();
  const std::size_t rows = x.numel() / n;
  const Spectrum wf = numeric::dft(w.data());
  auto xf = std::make_shared<std::vector<Spectrum>>(rows);
  std::vector<double> out(x.numel());
  auto xv = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    (*xf)[r] = numeric::dft(xv.subspan(r * n, n));
    const auto y = numeric::idft(numeric::multiply(wf, (*xf)[r]));
    std::copy(y.begin(), y.end(), out.begin() + static_cast<std::ptrdiff_t>(r * n));
  }
  return Tensor::from_op(
      "circular_filter", x.shape(), std::move(out), {x, w},
      [wf, xf, rows, n](std::span<const double> g, std::span<std::vector<double>* const> in) {
        Spectrum w_acc{std::vector<Complex>(Spectrum::bin_count(n), Complex(0.0, 0.0)), n};
        for (std::size_t r = 0; r < rows; ++r) {
          const Spectrum gf = numeric::dft(g.subspan(r * n, n));
          if (in[0]) {
            // correlation with w
            const auto gx = numeric::idft(numeric::multiply_conj(gf, wf));
            double* dst = in[0]->data() + r * n;
            for (std::size_t j = 0; j < n; ++j) dst[j] += gx[j];
          }
          if (in[1]) {
            const auto& xr = (*xf)[r].bins;
            for (std::size_t k = 0; k < w_acc.bins.size(); ++k) w_acc.bins[k] += gf.bins[k] * std::conj(xr[k]);
          }
        }
        if (in[1]) {
          // DC and Nyquist products of real-endpoint spectra are real.
          w_acc.bins.front().imag(0.0);
          if (n % 2 == 0) w_acc.bins.back().imag(0.0);
          const auto gw = numeric::idft(w_acc);
          auto& dst = *in[1];
          for (std::size_t j = 0; j < n; ++j) dst[j] += gw[j];
        }
      });
}

SpectralFilter::SpectralFilter(std::size_t length, numeric::Rng& rng, double init_std) {
  if (length == 0) throw InvalidArgument("spectral filter: length must be >= 1");
  std::vector<double> w(length);
  for (auto& v : w) v = rng.normal(0.0, init_std);
  w[0] += 1.0;
  weights_ = Tensor::parameter({length}, std::move(w));
}

SpectralFilter::SpectralFilter(std::vector<double> weights) {
  if (weights.empty()) throw InvalidArgument("spectral filter: length must be >= 1");
  const std::size_t n = weights.size();
  weights_ = Tensor::parameter({n}, std::move(weights));
}

Spectrum SpectralFilter::transfer() const { return numeric::dft(weights_.data()); }

std::vector<double> SpectralFilter::amplitude_spectrum() const {
  return spectral::amplitude_spectrum(weights_.data());
}

std::vector<double> SpectralFilter::apply(std::span<const double> y) const {
  return apply_filter(weights_.data(), y);
}

Tensor SpectralFilter::forward(const Tensor& x) const { return circular_filter(x, weights_); }

void SpectralFilter::register_state(const std::string& prefix, numeric::StateRegistry& reg) const {
  reg.add(prefix + ".weights", weights_);
}

}  // namespace sf::spectral
