#include "model/attention.hpp"

#include <cmath>

#include "errors.hpp"

namespace sf::model {

using numeric::Tensor;

AttentionBlock::AttentionBlock(const AttentionConfig& cfg, numeric::Rng& rng) : cfg_(cfg) {
  if (cfg_.d_model == 0 || cfg_.n_heads == 0 || cfg_.d_k == 0 || cfg_.ff_hidden == 0) {
    throw InvalidArgument("attention: d_model, n_heads, d_k and ff_hidden must be positive");
  }
  const std::size_t d = cfg_.d_model;
  const std::size_t h = cfg_.n_heads;
  query_ = numeric::Linear(d, h * cfg_.d_k, rng);
  key_ = numeric::Linear(d, h * cfg_.d_k, rng);
  value_ = numeric::Linear(d, h * d, rng);
  output_ = numeric::Linear(h * d, d, rng);
  attention_norm_ = numeric::BatchNorm(d);
  mlp_ = numeric::Mlp(d, cfg_.ff_hidden, cfg_.activation, cfg_.dropout, rng);
  mlp_norm_ = numeric::BatchNorm(d);
}

Tensor AttentionBlock::split_heads(const Tensor& t, std::size_t width) const {
  const std::size_t rows = t.size(0);
  const std::size_t n = t.size(1);
  const std::size_t h = cfg_.n_heads;
  Tensor r = numeric::permute(numeric::reshape(t, {rows, n, h, width}), {0, 2, 1, 3});
  return numeric::reshape(r, {rows * h, n, width});
}

Tensor AttentionBlock::forward(const Tensor& y, const numeric::ForwardContext& ctx, Tensor* weights) {
  const std::size_t d = cfg_.d_model;
  if (y.rank() != 3 || y.size(2) != d) {
    throw InvalidArgument("attention: expected [rows, patches, " + std::to_string(d) + "], got " +
                          numeric::to_string(y.shape()));
  }
  const std::size_t rows = y.size(0);
  const std::size_t n = y.size(1);
  const std::size_t h = cfg_.n_heads;

  Tensor q = split_heads(query_.forward(y), cfg_.d_k);
  Tensor k = split_heads(key_.forward(y), cfg_.d_k);
  Tensor v = split_heads(value_.forward(y), d);

  Tensor scores = numeric::scale(numeric::matmul(q, numeric::transpose(k)), 1.0 / std::sqrt(double(cfg_.d_k)));
  Tensor probs = numeric::softmax(scores);
  if (weights) *weights = probs.detach();
  Tensor mixed = numeric::matmul(numeric::maybe_dropout(probs, cfg_.dropout, ctx), v);

  Tensor merged = numeric::reshape(numeric::permute(numeric::reshape(mixed, {rows, h, n, d}), {0, 2, 1, 3}),
                                   {rows, n, h * d});
  Tensor attended = output_.forward(merged);

  Tensor x = attention_norm_.forward(numeric::add(y, numeric::maybe_dropout(attended, cfg_.dropout, ctx)),
                                     ctx.training);
  Tensor ff = mlp_.forward(x, ctx);
  return mlp_norm_.forward(numeric::add(x, numeric::maybe_dropout(ff, cfg_.dropout, ctx)), ctx.training);
}

void AttentionBlock::register_state(const std::string& prefix, numeric::StateRegistry& reg) {
  query_.register_state(prefix + ".query", reg);
  key_.register_state(prefix + ".key", reg);
  value_.register_state(prefix + ".value", reg);
  output_.register_state(prefix + ".output", reg);
  attention_norm_.register_state(prefix + ".attention_norm", reg);
  mlp_.register_state(prefix + ".mlp", reg);
  mlp_norm_.register_state(prefix + ".mlp_norm", reg);
}

std::size_t AttentionBlock::parameter_count(const AttentionConfig& cfg) {
  const std::size_t d = cfg.d_model;
  const std::size_t h = cfg.n_heads;
  const std::size_t qk = 2 * (d * h * cfg.d_k + h * cfg.d_k);
  const std::size_t v = d * h * d + h * d;
  const std::size_t out = h * d * d + d;
  const std::size_t mlp = d * cfg.ff_hidden + cfg.ff_hidden + cfg.ff_hidden * d + d;
  return qk + v + out + mlp + 4 * d;
}

}  // namespace sf::model
