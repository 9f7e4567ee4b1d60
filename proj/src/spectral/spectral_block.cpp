#include "spectral/spectral_block.hpp"

#include "errors.hpp"

namespace sf::spectral {

using numeric::Tensor;

void SpectralBlockConfig::validate() const {
  if (filtered_axis_length == 0) throw InvalidArgument("spectral block: filtered axis length must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0) throw InvalidArgument("spectral block: dropout must be in [0, 1)");
}

SpectralBlock::SpectralBlock(const SpectralBlockConfig& cfg, std::size_t d_model, numeric::Rng& rng)
    : cfg_(cfg), d_model_(d_model) {
  cfg_.validate();
  if (cfg_.mlp_hidden == 0) cfg_.mlp_hidden = 2 * d_model;
  if (cfg_.axis == FilterAxis::kEmbedding && cfg_.filtered_axis_length != d_model) {
    throw InvalidArgument("spectral block: filter length " + std::to_string(cfg_.filtered_axis_length) +
                          " must equal d_model " + std::to_string(d_model) + " on the embedding axis");
  }
  batch_norm_ = numeric::BatchNorm(d_model);
  filter_ = SpectralFilter(cfg_.filtered_axis_length, rng, cfg_.filter_init_std);
  instance_norm_ = numeric::InstanceNorm(d_model);
  if (cfg_.use_mlp) mlp_ = numeric::Mlp(d_model, cfg_.mlp_hidden, cfg_.activation, cfg_.dropout, rng);
}

Tensor SpectralBlock::forward(const Tensor& y, const numeric::ForwardContext& ctx, SpectralTrace* trace) {
  if (y.rank() != 3 || y.size(2) != d_model_) {
    throw InvalidArgument("spectral block: expected [rows, patches, " + std::to_string(d_model_) + "], got " +
                          numeric::to_string(y.shape()));
  }
  if (cfg_.axis == FilterAxis::kPatch && y.size(1) != cfg_.filtered_axis_length) {
    throw InvalidArgument("spectral block: filter length " + std::to_string(cfg_.filtered_axis_length) +
                          " does not match patch count " + std::to_string(y.size(1)));
  }
  const Tensor normalized = batch_norm_.forward(y, ctx.training);
  Tensor filtered;
  if (cfg_.axis == FilterAxis::kEmbedding) {
    filtered = filter_.forward(normalized);
  } else {
    filtered = numeric::permute(filter_.forward(numeric::permute(normalized, {0, 2, 1})), {0, 2, 1});
  }
  if (trace) *trace = SpectralTrace{normalized, filtered};
  Tensor out = instance_norm_.forward(filtered);
  if (cfg_.use_mlp) out = numeric::add(out, numeric::maybe_dropout(mlp_.forward(out, ctx), cfg_.dropout, ctx));
  return out;
}

void SpectralBlock::register_state(const std::string& prefix, numeric::StateRegistry& reg) {
  batch_norm_.register_state(prefix + ".batch_norm", reg);
  filter_.register_state(prefix + ".filter", reg);
  instance_norm_.register_state(prefix + ".instance_norm", reg);
  if (cfg_.use_mlp) mlp_.register_state(prefix + ".mlp", reg);
}

std::size_t SpectralBlock::parameter_count(const SpectralBlockConfig& cfg, std::size_t d_model) {
  const std::size_t hidden = cfg.mlp_hidden == 0 ? 2 * d_model : cfg.mlp_hidden;
  std::size_t n = 2 * d_model + cfg.filtered_axis_length + 2 * d_model;
  if (cfg.use_mlp) n += d_model * hidden + hidden + hidden * d_model + d_model;
  return n;
}

}  // namespace sf::spectral
