#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "numeric/layers.hpp"
#include "numeric/tensor.hpp"

namespace sf::model {

// Statistics captured by one normalization call, one entry per series row.
struct RevInState {
  std::size_t channels = 0;
  std::vector<double> mean;
  std::vector<double> stdev;  // >= eps
  std::size_t floored = 0;    // rows whose std was raised to eps
};

// Reversible instance normalization over the time axis of [batch, channels,
// time] inputs. Statistics use the population variance and are treated as
// constants for differentiation. The optional affine map is per channel.
class RevIn {
 public:
  static constexpr double kEps = 1e-5;

  RevIn() = default;
  RevIn(bool affine, std::size_t channels);

  numeric::Tensor normalize(const numeric::Tensor& x, RevInState& state) const;
  numeric::Tensor denormalize(const numeric::Tensor& y, const RevInState& state) const;

  bool affine() const { return affine_; }
  void register_state(const std::string& prefix, numeric::StateRegistry& reg) const;

 private:
  // [channels, len] expansion of a per-channel parameter.
  numeric::Tensor expand(const numeric::Tensor& per_channel, std::size_t len) const;

  bool affine_ = false;
  std::size_t channels_ = 0;
  numeric::Tensor gamma_;
  numeric::Tensor beta_;
};

}  // namespace sf::model
