#pragma once

#include <cstddef>
#include <string>

#include "numeric/layers.hpp"
#include "numeric/ops.hpp"
#include "numeric/tensor.hpp"

namespace sf::model {

struct AttentionConfig {
  std::size_t d_model = 0;
  std::size_t n_heads = 1;
  std::size_t d_k = 0;
  std::size_t ff_hidden = 0;
  numeric::Activation activation = numeric::Activation::kGelu;
  double dropout = 0.0;
};

// Multi-head self attention over patches followed by a feed-forward MLP, both
// with residual connections and post batch normalization. Each head projects
// to d_k for queries and keys and to the full d_model for values; the heads
// are merged by an (n_heads * d_model) -> d_model projection.
class AttentionBlock {
 public:
  AttentionBlock() = default;
  AttentionBlock(const AttentionConfig& cfg, numeric::Rng& rng);

  // y: [rows, patches, d_model]. When weights is non-null it receives the
  // softmax matrix, [rows * n_heads, patches, patches], before dropout.
  numeric::Tensor forward(const numeric::Tensor& y, const numeric::ForwardContext& ctx,
                          numeric::Tensor* weights = nullptr);

  void register_state(const std::string& prefix, numeric::StateRegistry& reg);

  const AttentionConfig& config() const { return cfg_; }
  static std::size_t parameter_count(const AttentionConfig& cfg);

 private:
  // [rows, n, heads * width] -> [rows * heads, n, width]
  numeric::Tensor split_heads(const numeric::Tensor& t, std::size_t width) const;

  AttentionConfig cfg_;
  numeric::Linear query_;
  numeric::Linear key_;
  numeric::Linear value_;
  numeric::Linear output_;
  numeric::BatchNorm attention_norm_;
  numeric::Mlp mlp_;
  numeric::BatchNorm mlp_norm_;
};

}  // namespace sf::model
