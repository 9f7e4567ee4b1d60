#pragma once

#include <cstddef>
#include <vector>

#include "numeric/layers.hpp"

namespace sf::training {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(std::vector<numeric::StateRegistry::Parameter> params, AdamConfig cfg = {});

  // One bias-corrected update from the current gradients. Parameters that
  // received no gradient are treated as having a zero gradient. A non-finite
  // gradient throws NumericError naming the parameter, before any update.
  void step(double lr);
  void zero_grad();

  std::size_t steps() const { return step_; }
  const std::vector<double>& first_moment(std::size_t i) const { return m_[i]; }
  const std::vector<double>& second_moment(std::size_t i) const { return v_[i]; }

 private:
  std::vector<numeric::StateRegistry::Parameter> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::size_t step_ = 0;
};

}  // namespace sf::training
