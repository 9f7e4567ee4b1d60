#pragma once

#include <cstddef>
#include <string>

#include "numeric/layers.hpp"
#include "spectral/filter.hpp"

namespace sf::spectral {

// Axis of an embedded [rows, patches, d_model] tensor that the filter runs
// along.
enum class FilterAxis { kEmbedding, kPatch };

struct SpectralBlockConfig {
  bool use_mlp = true;
  // 0 selects 2 * d_model.
  std::size_t mlp_hidden = 0;
  // Length of the filtered axis (d_model for kEmbedding, patch count for kPatch).
  std::size_t filtered_axis_length = 0;
  FilterAxis axis = FilterAxis::kEmbedding;
  numeric::Activation activation = numeric::Activation::kGelu;
  double dropout = 0.0;
  double filter_init_std = 0.02;

  void validate() const;
};

// Intermediate tensors of one forward pass, for spectrum inspection.
struct SpectralTrace {
  numeric::Tensor filter_input;
  numeric::Tensor filter_output;
};

// batch norm -> learnable filter -> instance norm -> optional residual MLP.
class SpectralBlock {
 public:
  SpectralBlock(const SpectralBlockConfig& cfg, std::size_t d_model, numeric::Rng& rng);

  // y: [rows, patches, d_model]; output has the same shape.
  numeric::Tensor forward(const numeric::Tensor& y, const numeric::ForwardContext& ctx,
                          SpectralTrace* trace = nullptr);

  const SpectralFilter& filter() const { return filter_; }
  const SpectralBlockConfig& config() const { return cfg_; }

  void register_state(const std::string& prefix, numeric::StateRegistry& reg);

  // Trainable scalars for the given shape, without instantiating a block.
  static std::size_t parameter_count(const SpectralBlockConfig& cfg, std::size_t d_model);

 private:
  SpectralBlockConfig cfg_;
  std::size_t d_model_;
  numeric::BatchNorm batch_norm_;
  SpectralFilter filter_;
  numeric::InstanceNorm instance_norm_;
  numeric::Mlp mlp_;
};

}  // namespace sf::spectral
