#include "training/metrics.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"
#include "numeric/ops.hpp"

namespace sf::training {

namespace {

void check(std::size_t a, std::size_t b) {
  if (a != b) throw InvalidArgument("metrics: prediction has " + std::to_string(a) + " values, target " + std::to_string(b));
  if (a == 0) throw InvalidArgument("metrics: empty input");
}

}  // namespace

numeric::Tensor mse_loss(const numeric::Tensor& pred, const numeric::Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw InvalidArgument("mse_loss: shape " + numeric::to_string(pred.shape()) + " vs " +
                          numeric::to_string(target.shape()));
  }
  return numeric::mean(numeric::square(numeric::sub(pred, target)));
}

double mse(std::span<const double> pred, std::span<const double> target) {
  check(pred.size(), target.size());
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - target[i]) * (pred[i] - target[i]);
  return s / double(pred.size());
}

double mae(std::span<const double> pred, std::span<const double> target) {
  check(pred.size(), target.size());
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::fabs(pred[i] - target[i]);
  return s / double(pred.size());
}

}  // namespace sf::training
