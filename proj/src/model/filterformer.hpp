#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "model/attention.hpp"
#include "model/config.hpp"
#include "model/revin.hpp"
#include "numeric/layers.hpp"
#include "numeric/random.hpp"
#include "spectral/filter.hpp"
#include "spectral/spectral_block.hpp"

namespace sf::model {

// Linear patch projection plus an optional learnable positional table.
class PatchEmbedding {
 public:
  PatchEmbedding() = default;
  PatchEmbedding(std::size_t patch_len, std::size_t patches, std::size_t d_model, bool positional,
                 numeric::Rng& rng);

  // patches: [rows, N, P] -> [rows, N, d_model]
  numeric::Tensor forward(const numeric::Tensor& patches) const;
  void register_state(const std::string& prefix, numeric::StateRegistry& reg) const;

  const numeric::Linear& projection() const { return projection_; }
  const numeric::Tensor& position() const { return position_; }

 private:
  numeric::Linear projection_;
  numeric::Tensor position_;
};

// Flattens [rows, N, d] and maps N*d -> horizon.
class ForecastHead {
 public:
  ForecastHead() = default;
  ForecastHead(std::size_t patches, std::size_t d_model, std::size_t horizon, numeric::Rng& rng);

  numeric::Tensor forward(const numeric::Tensor& z) const;
  void register_state(const std::string& prefix, numeric::StateRegistry& reg) const;

  const numeric::Linear& linear() const { return linear_; }

 private:
  numeric::Linear linear_;
};

// Intermediate values of one forward pass.
struct ForwardTrace {
  std::vector<spectral::SpectralTrace> spectral;
  std::vector<numeric::Tensor> attention_weights;
};

// Common interface of trainable forecasters. Inputs are [batch, channels,
// lookback]; outputs are [batch, channels, horizon]. Channels are processed
// independently with shared weights.
class Forecaster {
 public:
  virtual ~Forecaster() = default;

  virtual numeric::Tensor forward(const numeric::Tensor& x, bool training, ForwardTrace* trace = nullptr) = 0;
  virtual const ModelConfig& config() const = 0;
  // Named parameters and buffers, in a fixed order.
  virtual numeric::StateRegistry& state() = 0;

  // Inference convenience: no tape, evaluation mode.
  numeric::Tensor predict(const numeric::Tensor& x);
};

// Patch transformer without spectral blocks: RevIN -> patch -> embed ->
// attention blocks -> head -> inverse RevIN. The number of attention blocks
// is total_layers - alpha of the supplied config.
class PatchBackbone final : public Forecaster {
 public:
  PatchBackbone(const ModelConfig& cfg, std::uint64_t seed);
  PatchBackbone(const PatchBackbone&) = delete;
  PatchBackbone& operator=(const PatchBackbone&) = delete;

  numeric::Tensor forward(const numeric::Tensor& x, bool training, ForwardTrace* trace = nullptr) override;
  const ModelConfig& config() const override { return cfg_; }
  numeric::StateRegistry& state() override { return registry_; }

  // Stages, exposed so that other models can interleave their own.
  numeric::Tensor normalize(const numeric::Tensor& x, RevInState& state) const;
  // [batch, channels, L] -> [batch * channels, N, d]
  numeric::Tensor embed(const numeric::Tensor& normalized) const;
  numeric::Tensor encode(const numeric::Tensor& z, bool training, ForwardTrace* trace);
  // [batch * channels, N, d] -> [batch, channels, H]
  numeric::Tensor project(const numeric::Tensor& z, std::size_t batch, const RevInState& state) const;

  void register_state(numeric::StateRegistry& reg);

 private:
  void check_input(const numeric::Tensor& x) const;

  ModelConfig cfg_;
  RevIn revin_;
  PatchEmbedding embedding_;
  std::vector<AttentionBlock> blocks_;
  ForecastHead head_;
  numeric::Rng dropout_rng_;
  numeric::StateRegistry registry_;
};

// Backbone with alpha spectral blocks placed before the attention blocks.
// In post-embedding placement they act on embedded patches; in pre-embedding
// placement each is a length-L filter on the normalized series.
//
// Initialization draws from independent streams derived from the seed, so
// the backbone part is initialized exactly as a standalone PatchBackbone with
// the same seed and attention depth.
class FilterFormer final : public Forecaster {
 public:
  FilterFormer(const ModelConfig& cfg, std::uint64_t seed);
  FilterFormer(const FilterFormer&) = delete;
  FilterFormer& operator=(const FilterFormer&) = delete;

  numeric::Tensor forward(const numeric::Tensor& x, bool training, ForwardTrace* trace = nullptr) override;
  const ModelConfig& config() const override { return cfg_; }
  numeric::StateRegistry& state() override { return registry_; }

  std::size_t spectral_block_count() const { return cfg_.alpha; }
  // The filter of spectral block i, in either placement.
  const spectral::SpectralFilter& filter(std::size_t i) const;

 private:
  ModelConfig cfg_;
  PatchBackbone backbone_;
  std::vector<spectral::SpectralBlock> spectral_blocks_;
  std::vector<spectral::SpectralFilter> input_filters_;
  numeric::Rng dropout_rng_;
  numeric::StateRegistry registry_;
};

std::unique_ptr<Forecaster> make_forecaster(const ModelConfig& cfg, std::uint64_t seed);

struct ParameterBreakdown {
  struct Entry {
    std::string component;
    std::size_t count = 0;
  };
  std::vector<Entry> entries;
  std::size_t total = 0;
};

// Analytic trainable-parameter count for a config, without building it.
ParameterBreakdown count_parameters(const ModelConfig& cfg);

}  // namespace sf::model
