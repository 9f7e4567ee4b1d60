#include "numeric/layers.hpp"

#include <cmath>

#include "errors.hpp"

namespace sf::numeric {

std::size_t StateRegistry::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters) n += p.tensor.numel();
  return n;
}

Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> v(fan_in * fan_out);
  for (auto& x : v) x = rng.uniform(-bound, bound);
  return Tensor::parameter({fan_in, fan_out}, std::move(v));
}

Tensor normal_parameter(Shape shape, double stddev, Rng& rng) {
  std::vector<double> v(element_count(shape));
  for (auto& x : v) x = rng.normal(0.0, stddev);
  return Tensor::parameter(std::move(shape), std::move(v));
}

Tensor constant_parameter(Shape shape, double value) {
  const std::size_t n = element_count(shape);
  return Tensor::parameter(std::move(shape), std::vector<double>(n, value));
}

Linear::Linear(std::size_t in, std::size_t out, Rng& rng)
    : in_(in), out_(out), weight_(xavier_uniform(in, out, rng)), bias_(constant_parameter({out}, 0.0)) {}

Tensor Linear::forward(const Tensor& x) const { return add(matmul(x, weight_), bias_); }

void Linear::register_state(const std::string& prefix, StateRegistry& reg) const {
  reg.add(prefix + ".weight", weight_);
  reg.add(prefix + ".bias", bias_);
}

BatchNorm::BatchNorm(std::size_t features, double momentum, double eps)
    : features_(features),
      momentum_(momentum),
      eps_(eps),
      gamma_(constant_parameter({features}, 1.0)),
      beta_(constant_parameter({features}, 0.0)),
      running_mean_(features, 0.0),
      running_var_(features, 1.0) {}

Tensor BatchNorm::forward(const Tensor& x, bool training) {
  if (x.rank() == 0 || x.shape().back() != features_) {
    throw InvalidArgument("batch norm: expected last axis " + std::to_string(features_) + ", got " +
                          to_string(x.shape()));
  }
  Tensor normalized;
  if (training) {
    ColumnStats stats;
    normalized = normalize_columns(x, eps_, &stats);
    const double rows = static_cast<double>(x.numel() / features_);
    const double unbias = rows > 1.0 ? rows / (rows - 1.0) : 1.0;
    for (std::size_t c = 0; c < features_; ++c) {
      running_mean_[c] = (1.0 - momentum_) * running_mean_[c] + momentum_ * stats.mean[c];
      running_var_[c] = (1.0 - momentum_) * running_var_[c] + momentum_ * stats.var[c] * unbias;
    }
  } else {
    normalized = normalize_columns_fixed(x, running_mean_, running_var_, eps_);
  }
  return add(mul(normalized, gamma_), beta_);
}

void BatchNorm::register_state(const std::string& prefix, StateRegistry& reg) {
  reg.add(prefix + ".gamma", gamma_);
  reg.add(prefix + ".beta", beta_);
  reg.add_buffer(prefix + ".running_mean", running_mean_);
  reg.add_buffer(prefix + ".running_var", running_var_);
}

InstanceNorm::InstanceNorm(std::size_t features, double eps)
    : eps_(eps), gamma_(constant_parameter({features}, 1.0)), beta_(constant_parameter({features}, 0.0)) {}

Tensor InstanceNorm::forward(const Tensor& x) const {
  return add(mul(normalize_lastdim(x, eps_), gamma_), beta_);
}

void InstanceNorm::register_state(const std::string& prefix, StateRegistry& reg) const {
  reg.add(prefix + ".gamma", gamma_);
  reg.add(prefix + ".beta", beta_);
}

Mlp::Mlp(std::size_t features, std::size_t hidden, Activation act, double dropout, Rng& rng)
    : up_(features, hidden, rng), down_(hidden, features, rng), act_(act), dropout_(dropout) {}

Tensor Mlp::forward(const Tensor& x, const ForwardContext& ctx) const {
  Tensor h = maybe_dropout(activate(up_.forward(x), act_), dropout_, ctx);
  return down_.forward(h);
}

void Mlp::register_state(const std::string& prefix, StateRegistry& reg) const {
  up_.register_state(prefix + ".up", reg);
  down_.register_state(prefix + ".down", reg);
}

Tensor maybe_dropout(const Tensor& x, double p, const ForwardContext& ctx) {
  if (!ctx.training || p <= 0.0) return x;
  if (!ctx.rng) throw InvalidArgument("dropout: training forward pass needs a random stream");
  return dropout(x, p, *ctx.rng);
}

}  // namespace sf::numeric
