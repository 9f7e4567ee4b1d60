#pragma once

#include <span>

#include "numeric/tensor.hpp"

namespace sf::training {

struct Metrics {
  double mse = 0.0;
  double mae = 0.0;
};

// Differentiable mean squared error over all elements.
numeric::Tensor mse_loss(const numeric::Tensor& pred, const numeric::Tensor& target);

double mse(std::span<const double> pred, std::span<const double> target);
double mae(std::span<const double> pred, std::span<const double> target);

}  // namespace sf::training
