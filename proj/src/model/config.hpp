#pragma once

#include <cstddef>
#include <string>

#include <json.hpp>

#include "numeric/ops.hpp"
#include "spectral/spectral_block.hpp"

namespace sf::model {

enum class FilterPlacement {
  // Spectral blocks operate on embedded patches.
  kPostEmbedding,
  // Each spectral block is replaced by a length-L filter applied to the
  // instance-normalized series before patching.
  kPreEmbedding,
};

// N = floor((L - P) / S) + 1. Throws InvalidArgument when P > L or P, S == 0.
std::size_t patch_count(std::size_t lookback, std::size_t patch_len, std::size_t stride);

struct ModelConfig {
  std::size_t lookback = 96;
  std::size_t horizon = 96;
  std::size_t patch_len = 16;
  std::size_t stride = 0;  // 0: same as patch_len
  std::size_t d_model = 128;
  std::size_t n_heads = 4;
  std::size_t d_k = 0;  // 0: d_model / n_heads
  std::size_t total_layers = 4;
  std::size_t alpha = 1;  // spectral blocks among total_layers
  std::size_t attention_ff = 0;  // 0: 2 * d_model

  bool spectral_mlp = true;
  std::size_t spectral_mlp_hidden = 0;  // 0: 2 * d_model
  spectral::FilterAxis filter_axis = spectral::FilterAxis::kEmbedding;
  FilterPlacement filter_placement = FilterPlacement::kPostEmbedding;

  double dropout = 0.1;
  numeric::Activation activation = numeric::Activation::kGelu;
  bool positional_embedding = true;
  bool revin_affine = false;
  std::size_t channels = 0;  // required when revin_affine

  std::size_t effective_stride() const { return stride == 0 ? patch_len : stride; }
  std::size_t patches() const { return patch_count(lookback, patch_len, effective_stride()); }
  std::size_t head_dim() const { return d_k == 0 ? d_model / n_heads : d_k; }
  std::size_t ff_hidden() const { return attention_ff == 0 ? 2 * d_model : attention_ff; }
  std::size_t attention_layers() const { return total_layers - alpha; }

  spectral::SpectralBlockConfig spectral_block_config() const;

  // Throws ConfigError naming the offending field.
  void validate() const;

  // Small preset for gradient checks and smoke runs: L=16, P=4, d_model=8,
  // one spectral and one attention block.
  static ModelConfig tiny();
};

void to_json(nlohmann::json& j, const ModelConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, ModelConfig& c);

}  // namespace sf::model
