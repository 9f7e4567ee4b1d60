#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include <json.hpp>

#include "data/series.hpp"

namespace sf::data {

struct SineComponent {
  double amplitude = 0.0;
  double frequency = 0.0;  // cycles per sample
  double phase = 0.0;      // radians
};

// Low, mid and high frequency sines plus optional Gaussian noise.
struct SyntheticSpec {
  std::array<SineComponent, 3> components{{{1.0, 2.0 / 96.0, 0.0}, {0.6, 10.0 / 96.0, 0.0}, {0.4, 30.0 / 96.0, 0.0}}};
  std::size_t length = 2000;
  double noise = 0.0;  // standard deviation

  // Throws ConfigError unless 0 < f_low < f_mid < f_high < 0.5.
  void validate() const;
};

void to_json(nlohmann::json& j, const SyntheticSpec& s);
void from_json(const nlohmann::json& j, SyntheticSpec& s);

// Single-channel series x_t = sum_j A_j sin(2 pi f_j t + phi_j) + noise.
RawSeries synth_three_sine(const SyntheticSpec& spec, std::uint64_t seed = 0);

}  // namespace sf::data
