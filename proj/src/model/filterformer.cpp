#include "model/filterformer.hpp"

#include "errors.hpp"
#include "numeric/ops.hpp"

namespace sf::model {

using numeric::Tensor;

namespace {

constexpr std::uint64_t kSpectralInitStream = 1;
constexpr std::uint64_t kBackboneDropoutStream = 2;
constexpr std::uint64_t kSpectralDropoutStream = 3;
constexpr double kPositionInitStd = 0.02;

AttentionConfig attention_config(const ModelConfig& cfg) {
  AttentionConfig a;
  a.d_model = cfg.d_model;
  a.n_heads = cfg.n_heads;
  a.d_k = cfg.head_dim();
  a.ff_hidden = cfg.ff_hidden();
  a.activation = cfg.activation;
  a.dropout = cfg.dropout;
  return a;
}

const ModelConfig& validated(const ModelConfig& cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

PatchEmbedding::PatchEmbedding(std::size_t patch_len, std::size_t patches, std::size_t d_model, bool positional,
                               numeric::Rng& rng)
    : projection_(patch_len, d_model, rng) {
  if (positional) position_ = numeric::normal_parameter({patches, d_model}, kPositionInitStd, rng);
}

Tensor PatchEmbedding::forward(const Tensor& patches) const {
  Tensor y = projection_.forward(patches);
  if (position_.defined()) y = numeric::add(y, position_);
  return y;
}

void PatchEmbedding::register_state(const std::string& prefix, numeric::StateRegistry& reg) const {
  projection_.register_state(prefix + ".projection", reg);
  if (position_.defined()) reg.add(prefix + ".position", position_);
}

ForecastHead::ForecastHead(std::size_t patches, std::size_t d_model, std::size_t horizon, numeric::Rng& rng)
    : linear_(patches * d_model, horizon, rng) {}

Tensor ForecastHead::forward(const Tensor& z) const { return linear_.forward(numeric::flatten(z, 1)); }

void ForecastHead::register_state(const std::string& prefix, numeric::StateRegistry& reg) const {
  linear_.register_state(prefix + ".linear", reg);
}

Tensor Forecaster::predict(const Tensor& x) {
  numeric::NoGradGuard guard;
  return forward(x, false);
}

PatchBackbone::PatchBackbone(const ModelConfig& cfg, std::uint64_t seed)
    : cfg_(validated(cfg)), dropout_rng_(numeric::mix_seed(seed, kBackboneDropoutStream)) {
  numeric::Rng init(seed);
  revin_ = RevIn(cfg_.revin_affine, cfg_.channels);
  embedding_ = PatchEmbedding(cfg_.patch_len, cfg_.patches(), cfg_.d_model, cfg_.positional_embedding, init);
  const AttentionConfig acfg = attention_config(cfg_);
  for (std::size_t i = 0; i < cfg_.attention_layers(); ++i) blocks_.emplace_back(acfg, init);
  head_ = ForecastHead(cfg_.patches(), cfg_.d_model, cfg_.horizon, init);
  register_state(registry_);
}

void PatchBackbone::register_state(numeric::StateRegistry& reg) {
  revin_.register_state("revin", reg);
  embedding_.register_state("embedding", reg);
  for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i].register_state("attention." + std::to_string(i), reg);
  head_.register_state("head", reg);
}

void PatchBackbone::check_input(const Tensor& x) const {
  if (x.rank() != 3 || x.size(2) != cfg_.lookback) {
    throw InvalidArgument("model: expected input [batch, channels, " + std::to_string(cfg_.lookback) + "], got " +
                          numeric::to_string(x.shape()));
  }
  if (cfg_.revin_affine && x.size(1) != cfg_.channels) {
    throw InvalidArgument("model: configured for " + std::to_string(cfg_.channels) + " channels, got " +
                          std::to_string(x.size(1)));
  }
}

Tensor PatchBackbone::normalize(const Tensor& x, RevInState& state) const {
  check_input(x);
  return revin_.normalize(x, state);
}

Tensor PatchBackbone::embed(const Tensor& normalized) const {
  const std::size_t rows = normalized.size(0) * normalized.size(1);
  Tensor series = numeric::reshape(normalized, {rows, cfg_.lookback});
  return embedding_.forward(numeric::unfold_lastdim(series, cfg_.patch_len, cfg_.effective_stride()));
}

Tensor PatchBackbone::encode(const Tensor& z, bool training, ForwardTrace* trace) {
  numeric::ForwardContext ctx{training, &dropout_rng_};
  Tensor h = z;
  for (auto& block : blocks_) {
    Tensor weights;
    h = block.forward(h, ctx, trace ? &weights : nullptr);
    if (trace) trace->attention_weights.push_back(weights);
  }
  return h;
}

Tensor PatchBackbone::project(const Tensor& z, std::size_t batch, const RevInState& state) const {
  Tensor out = head_.forward(z);
  out = numeric::reshape(out, {batch, state.channels, cfg_.horizon});
  return revin_.denormalize(out, state);
}

Tensor PatchBackbone::forward(const Tensor& x, bool training, ForwardTrace* trace) {
  RevInState st;
  Tensor n = normalize(x, st);
  Tensor z = encode(embed(n), training, trace);
  return project(z, x.size(0), st);
}

FilterFormer::FilterFormer(const ModelConfig& cfg, std::uint64_t seed)
    : cfg_(validated(cfg)),
      backbone_(cfg, seed),
      dropout_rng_(numeric::mix_seed(seed, kSpectralDropoutStream)) {
  numeric::Rng init(numeric::mix_seed(seed, kSpectralInitStream));
  if (cfg_.filter_placement == FilterPlacement::kPostEmbedding) {
    const spectral::SpectralBlockConfig scfg = cfg_.spectral_block_config();
    for (std::size_t i = 0; i < cfg_.alpha; ++i) spectral_blocks_.emplace_back(scfg, cfg_.d_model, init);
  } else {
    for (std::size_t i = 0; i < cfg_.alpha; ++i) input_filters_.emplace_back(cfg_.lookback, init);
  }
  // Order: revin, embedding, spectral, attention, head.
  numeric::StateRegistry inner;
  backbone_.register_state(inner);
  numeric::StateRegistry spectral_reg;
  for (std::size_t i = 0; i < spectral_blocks_.size(); ++i) {
    spectral_blocks_[i].register_state("spectral." + std::to_string(i), spectral_reg);
  }
  for (std::size_t i = 0; i < input_filters_.size(); ++i) {
    input_filters_[i].register_state("input_filter." + std::to_string(i), spectral_reg);
  }
  auto is_tail = [](const std::string& name) { return name.rfind("attention.", 0) == 0 || name.rfind("head.", 0) == 0; };
  for (const auto& p : inner.parameters) if (!is_tail(p.name)) registry_.parameters.push_back(p);
  for (const auto& p : spectral_reg.parameters) registry_.parameters.push_back(p);
  for (const auto& p : inner.parameters) if (is_tail(p.name)) registry_.parameters.push_back(p);
  for (const auto& b : inner.buffers) if (!is_tail(b.name)) registry_.buffers.push_back(b);
  for (const auto& b : spectral_reg.buffers) registry_.buffers.push_back(b);
  for (const auto& b : inner.buffers) if (is_tail(b.name)) registry_.buffers.push_back(b);
}

const spectral::SpectralFilter& FilterFormer::filter(std::size_t i) const {
  if (i >= cfg_.alpha) throw InvalidArgument("model: spectral block index " + std::to_string(i) + " out of range");
  return cfg_.filter_placement == FilterPlacement::kPostEmbedding ? spectral_blocks_[i].filter() : input_filters_[i];
}

Tensor FilterFormer::forward(const Tensor& x, bool training, ForwardTrace* trace) {
  numeric::ForwardContext ctx{training, &dropout_rng_};
  RevInState st;
  Tensor n = backbone_.normalize(x, st);
  for (std::size_t i = 0; i < input_filters_.size(); ++i) {
    Tensor filtered = input_filters_[i].forward(n);
    if (trace) trace->spectral.push_back({n, filtered});
    n = filtered;
  }
  Tensor z = backbone_.embed(n);
  for (auto& block : spectral_blocks_) {
    spectral::SpectralTrace t;
    z = block.forward(z, ctx, trace ? &t : nullptr);
    if (trace) trace->spectral.push_back(t);
  }
  z = backbone_.encode(z, training, trace);
  return backbone_.project(z, x.size(0), st);
}

std::unique_ptr<Forecaster> make_forecaster(const ModelConfig& cfg, std::uint64_t seed) {
  return std::make_unique<FilterFormer>(cfg, seed);
}

ParameterBreakdown count_parameters(const ModelConfig& cfg) {
  cfg.validate();
  ParameterBreakdown b;
  auto add = [&b](std::string name, std::size_t n) {
    b.entries.push_back({std::move(name), n});
    b.total += n;
  };
  const std::size_t d = cfg.d_model;
  const std::size_t n = cfg.patches();
  if (cfg.revin_affine) add("revin", 2 * cfg.channels);
  add("embedding", cfg.patch_len * d + d);
  if (cfg.positional_embedding) add("positional_embedding", n * d);
  if (cfg.filter_placement == FilterPlacement::kPostEmbedding) {
    const auto scfg = cfg.spectral_block_config();
    const std::size_t filter = scfg.filtered_axis_length;
    for (std::size_t i = 0; i < cfg.alpha; ++i) {
      const std::string prefix = "spectral." + std::to_string(i);
      add(prefix + ".filter", filter);
      add(prefix + ".other", spectral::SpectralBlock::parameter_count(scfg, d) - filter);
    }
  } else {
    for (std::size_t i = 0; i < cfg.alpha; ++i) add("input_filter." + std::to_string(i), cfg.lookback);
  }
  const std::size_t per_attention = AttentionBlock::parameter_count(attention_config(cfg));
  for (std::size_t i = 0; i < cfg.attention_layers(); ++i) add("attention." + std::to_string(i), per_attention);
  add("head", n * d * cfg.horizon + cfg.horizon);
  return b;
}

}  // namespace sf::model
