#include "model/revin.hpp"

#include <cmath>

#include "errors.hpp"
#include "log.hpp"
#include "numeric/ops.hpp"

namespace sf::model {

using numeric::Tensor;

RevIn::RevIn(bool affine, std::size_t channels)
    : affine_(affine), channels_(channels) {
  if (affine_) {
    gamma_ = numeric::constant_parameter({channels}, 1.0);
    beta_ = numeric::constant_parameter({channels}, 0.0);
  }
}

Tensor RevIn::expand(const Tensor& per_channel, std::size_t len) const {
  return numeric::matmul(numeric::reshape(per_channel, {channels_, 1}), Tensor({1, len}, 1.0));
}

Tensor RevIn::normalize(const Tensor& x, RevInState& state) const {
  if (x.rank() != 3) {
    throw InvalidArgument("revin: expected [batch, channels, time], got " + numeric::to_string(x.shape()));
  }
  const std::size_t channels = x.size(1);
  const std::size_t len = x.size(2);
  if (len < 2) throw InvalidArgument("revin: need at least 2 time steps, got " + std::to_string(len));
  if (affine_ && channels != channels_) {
    throw InvalidArgument("revin: configured for " + std::to_string(channels_) + " channels, got " +
                          std::to_string(channels));
  }
  const std::size_t rows = x.numel() / len;
  state = RevInState{channels, std::vector<double>(rows), std::vector<double>(rows), 0};
  std::vector<double> scale(rows), shift(rows);
  auto xv = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double m = 0.0;
    for (std::size_t t = 0; t < len; ++t) m += xv[r * len + t];
    m /= static_cast<double>(len);
    double v = 0.0;
    for (std::size_t t = 0; t < len; ++t) v += (xv[r * len + t] - m) * (xv[r * len + t] - m);
    v /= static_cast<double>(len);
    double s = std::sqrt(v);
    if (!(s >= kEps)) {
      s = kEps;
      ++state.floored;
    }
    state.mean[r] = m;
    state.stdev[r] = s;
    scale[r] = 1.0 / s;
    shift[r] = -m / s;
  }
  if (state.floored > 0) {
    log_warning("revin: " + std::to_string(state.floored) + " series with near-zero variance; std floored at eps");
  }
  Tensor out = numeric::affine_rows(x, scale, shift);
  if (affine_) out = numeric::add(numeric::mul(out, expand(gamma_, len)), expand(beta_, len));
  return out;
}

Tensor RevIn::denormalize(const Tensor& y, const RevInState& state) const {
  if (y.rank() != 3 || y.size(1) != state.channels || y.size(0) * y.size(1) != state.mean.size()) {
    throw InvalidArgument("revin: output shape " + numeric::to_string(y.shape()) + " does not match " +
                          std::to_string(state.channels) + " channels / " + std::to_string(state.mean.size()) +
                          " normalized series");
  }
  const std::size_t len = y.size(2);
  Tensor z = y;
  if (affine_) {
    z = numeric::div(numeric::sub(z, expand(beta_, len)), expand(gamma_, len));
  }
  return numeric::affine_rows(z, state.stdev, state.mean);
}

void RevIn::register_state(const std::string& prefix, numeric::StateRegistry& reg) const {
  if (affine_) {
    reg.add(prefix + ".gamma", gamma_);
    reg.add(prefix + ".beta", beta_);
  }
}

}  // namespace sf::model
