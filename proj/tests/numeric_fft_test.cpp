#include <gtest/gtest.h>

#include <cmath>

#include "errors.hpp"
#include "numeric/fft.hpp"
#include "numeric/random.hpp"
#include "support/oracles.hpp"

using sf::numeric::Complex;
using sf::numeric::dft;
using sf::numeric::idft;
using sf::numeric::Rng;
using sf::numeric::Spectrum;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST(Dft, ImpulseHasFlatSpectrum) {
  const auto s = dft(std::vector<double>{1, 0, 0, 0});
  ASSERT_EQ(s.bins.size(), 3u);
  for (const auto& b : s.bins) {
    EXPECT_NEAR(b.real(), 1.0, 1e-15);
    EXPECT_NEAR(b.imag(), 0.0, 1e-15);
  }
}

TEST(Dft, ConstantIsDcOnly) {
  const std::size_t n = 6;
  const double c = 2.5;
  const auto s = dft(std::vector<double>(n, c));
  EXPECT_NEAR(s.bins[0].real(), n * c, 1e-12);
  for (std::size_t k = 1; k < s.bins.size(); ++k) EXPECT_LT(std::abs(s.bins[k]), 1e-12);
}

TEST(Dft, RandomLengthSevenMatchesNaiveSum) {
  Rng rng(11);
  const auto x = random_vector(rng, 7);
  const auto fast = dft(x);
  const auto slow = sf::testing::naive_dft(x);
  ASSERT_EQ(fast.bins.size(), 4u);
  for (std::size_t k = 0; k < fast.bins.size(); ++k) EXPECT_LT(std::abs(fast.bins[k] - slow[k]), 1e-10);
}

TEST(Dft, EmptyInputRejected) { EXPECT_THROW(dft(std::vector<double>{}), sf::InvalidArgument); }

TEST(Dft, AgreesWithNaiveSumForLengthsUpTo32) {
  Rng rng(3);
  for (std::size_t n = 1; n <= 32; ++n) {
    const auto x = random_vector(rng, n);
    const auto fast = dft(x);
    const auto slow = sf::testing::naive_dft(x);
    for (std::size_t k = 0; k < fast.bins.size(); ++k) {
      ASSERT_LT(std::abs(fast.bins[k] - slow[k]), 1e-9) << "n=" << n << " k=" << k;
    }
  }
}

TEST(Dft, StoresHermitianHalfWithRealEndpoints) {
  Rng rng(5);
  for (std::size_t n : {1u, 2u, 5u, 8u, 9u, 16u}) {
    const auto s = dft(random_vector(rng, n));
    EXPECT_EQ(s.bins.size(), n / 2 + 1);
    EXPECT_EQ(s.bins.front().imag(), 0.0);
    if (n % 2 == 0) EXPECT_EQ(s.bins.back().imag(), 0.0);
    EXPECT_NO_THROW(s.validate());
  }
}

TEST(Dft, Linearity) {
  Rng rng(8);
  for (std::size_t n : {3u, 8u, 12u, 31u}) {
    const auto x = random_vector(rng, n);
    const auto y = random_vector(rng, n);
    const double a = 1.7, b = -0.3;
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = a * x[i] + b * y[i];
    const auto sx = dft(x), sy = dft(y), sz = dft(z);
    for (std::size_t k = 0; k < sz.bins.size(); ++k) {
      EXPECT_LT(std::abs(sz.bins[k] - (a * sx.bins[k] + b * sy.bins[k])), 1e-9);
    }
  }
}

TEST(Dft, Parseval) {
  Rng rng(21);
  for (std::size_t n = 1; n <= 40; ++n) {
    const auto x = random_vector(rng, n);
    const auto s = dft(x);
    double time_energy = 0.0;
    for (double v : x) time_energy += v * v;
    double freq_energy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      // expand the full symmetric spectrum from the stored half
      const Complex b = k < s.bins.size() ? s.bins[k] : std::conj(s.bins[n - k]);
      freq_energy += std::norm(b);
    }
    freq_energy /= static_cast<double>(n);
    EXPECT_NEAR(freq_energy, time_energy, 1e-8 * time_energy) << "n=" << n;
  }
}

TEST(Idft, RoundTripForLengthsUpTo64) {
  Rng rng(17);
  for (std::size_t n = 1; n <= 64; ++n) {
    const auto x = random_vector(rng, n);
    const auto back = idft(dft(x));
    ASSERT_EQ(back.size(), n);
    for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(back[i], x[i], 1e-10) << "n=" << n;
  }
}

TEST(Idft, DcOnlySpectrumGivesConstantOnes) {
  const std::size_t n = 5;
  Spectrum s{std::vector<Complex>(3, Complex(0, 0)), n};
  s.bins[0] = Complex(static_cast<double>(n), 0);
  for (double v : idft(s)) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(Idft, FixedVectorRoundTrip) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const auto back = idft(dft(x));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1e-12);
}

TEST(Idft, RejectsBrokenSymmetryEndpoints) {
  Spectrum dc{std::vector<Complex>{{1, 0.5}, {0, 0}, {0, 0}}, 4};
  EXPECT_THROW(idft(dc), sf::InvalidArgument);
  Spectrum nyquist{std::vector<Complex>{{1, 0}, {0, 0}, {0, 0.1}}, 4};
  EXPECT_THROW(idft(nyquist), sf::InvalidArgument);
  Spectrum wrong_count{std::vector<Complex>{{1, 0}, {0, 0}}, 4};
  EXPECT_THROW(idft(wrong_count), sf::InvalidArgument);
  // Odd lengths have no Nyquist bin; the last bin may be complex.
  Spectrum odd{std::vector<Complex>{{1, 0}, {0, 0}, {0, 0.1}}, 5};
  EXPECT_NO_THROW(idft(odd));
}

TEST(ComplexFft, InverseUndoesForwardOnNonPowerOfTwo) {
  Rng rng(2);
  for (std::size_t n : {3u, 6u, 7u, 10u, 13u, 100u}) {
    std::vector<Complex> x(n);
    for (auto& v : x) v = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const auto back = sf::numeric::ifft(sf::numeric::fft(x));
    for (std::size_t i = 0; i < n; ++i) EXPECT_LT(std::abs(back[i] - x[i]), 1e-12);
  }
}
