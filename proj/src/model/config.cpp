#include "model/config.hpp"

#include <set>

#include "errors.hpp"

namespace sf::model {

using nlohmann::json;

std::size_t patch_count(std::size_t lookback, std::size_t patch_len, std::size_t stride) {
  if (patch_len == 0 || stride == 0) throw InvalidArgument("patching: patch length and stride must be >= 1");
  if (patch_len > lookback) {
    throw InvalidArgument("patching: patch length " + std::to_string(patch_len) + " exceeds lookback " +
                          std::to_string(lookback));
  }
  return (lookback - patch_len) / stride + 1;
}

spectral::SpectralBlockConfig ModelConfig::spectral_block_config() const {
  spectral::SpectralBlockConfig s;
  s.use_mlp = spectral_mlp;
  s.mlp_hidden = spectral_mlp_hidden == 0 ? 2 * d_model : spectral_mlp_hidden;
  s.axis = filter_axis;
  s.filtered_axis_length = filter_axis == spectral::FilterAxis::kEmbedding ? d_model : patches();
  s.activation = activation;
  s.dropout = dropout;
  return s;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("model config: " + msg); };
  if (lookback < 2) fail("lookback must be >= 2");
  if (horizon < 1) fail("horizon must be >= 1");
  if (patch_len < 1) fail("patch_len must be >= 1");
  if (patch_len > lookback) fail("patch_len " + std::to_string(patch_len) + " exceeds lookback " + std::to_string(lookback));
  if (d_model < 1) fail("d_model must be >= 1");
  if (n_heads < 1) fail("n_heads must be >= 1");
  if (d_k == 0 && d_model % n_heads != 0) {
    fail("d_model " + std::to_string(d_model) + " is not divisible by n_heads " + std::to_string(n_heads));
  }
  if (alpha > total_layers) fail("alpha " + std::to_string(alpha) + " exceeds total_layers " + std::to_string(total_layers));
  if (dropout < 0.0 || dropout >= 1.0) fail("dropout must be in [0, 1)");
  if (revin_affine && channels == 0) fail("revin_affine needs channels > 0");
}

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.lookback = 16;
  c.horizon = 8;
  c.patch_len = 4;
  c.stride = 4;
  c.d_model = 8;
  c.n_heads = 2;
  c.total_layers = 2;
  c.alpha = 1;
  c.dropout = 0.0;
  return c;
}

namespace {

const char* to_string(spectral::FilterAxis a) { return a == spectral::FilterAxis::kEmbedding ? "embedding" : "patch"; }
const char* to_string(FilterPlacement p) {
  return p == FilterPlacement::kPostEmbedding ? "post_embedding" : "pre_embedding";
}
const char* to_string(numeric::Activation a) { return a == numeric::Activation::kGelu ? "gelu" : "relu"; }

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void to_json(json& j, const ModelConfig& c) {
  j = json{{"lookback", c.lookback},
           {"horizon", c.horizon},
           {"patch_len", c.patch_len},
           {"stride", c.effective_stride()},
           {"d_model", c.d_model},
           {"n_heads", c.n_heads},
           {"d_k", c.head_dim()},
           {"total_layers", c.total_layers},
           {"alpha", c.alpha},
           {"attention_ff", c.ff_hidden()},
           {"spectral_mlp", c.spectral_mlp},
           {"spectral_mlp_hidden", c.spectral_mlp_hidden == 0 ? 2 * c.d_model : c.spectral_mlp_hidden},
           {"filter_axis", to_string(c.filter_axis)},
           {"filter_placement", to_string(c.filter_placement)},
           {"dropout", c.dropout},
           {"activation", to_string(c.activation)},
           {"positional_embedding", c.positional_embedding},
           {"revin_affine", c.revin_affine},
           {"channels", c.channels}};
}

void from_json(const json& j, ModelConfig& c) {
  static const std::set<std::string> known{
      "lookback", "horizon", "patch_len", "stride", "d_model", "n_heads", "d_k", "total_layers", "alpha",
      "attention_ff", "spectral_mlp", "spectral_mlp_hidden", "filter_axis", "filter_placement", "dropout",
      "activation", "positional_embedding", "revin_affine", "channels"};
  if (!j.is_object()) throw ConfigError("model config: expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("model config: unknown key '" + key + "'");
  }
  try {
    read(j, "lookback", c.lookback);
    read(j, "horizon", c.horizon);
    read(j, "patch_len", c.patch_len);
    read(j, "stride", c.stride);
    read(j, "d_model", c.d_model);
    read(j, "n_heads", c.n_heads);
    read(j, "d_k", c.d_k);
    read(j, "total_layers", c.total_layers);
    read(j, "alpha", c.alpha);
    read(j, "attention_ff", c.attention_ff);
    read(j, "spectral_mlp", c.spectral_mlp);
    read(j, "spectral_mlp_hidden", c.spectral_mlp_hidden);
    read(j, "dropout", c.dropout);
    read(j, "positional_embedding", c.positional_embedding);
    read(j, "revin_affine", c.revin_affine);
    read(j, "channels", c.channels);
    if (j.contains("filter_axis")) {
      const auto v = j.at("filter_axis").get<std::string>();
      if (v == "embedding") c.filter_axis = spectral::FilterAxis::kEmbedding;
      else if (v == "patch") c.filter_axis = spectral::FilterAxis::kPatch;
      else throw ConfigError("model config: filter_axis must be 'embedding' or 'patch', got '" + v + "'");
    }
    if (j.contains("filter_placement")) {
      const auto v = j.at("filter_placement").get<std::string>();
      if (v == "post_embedding") c.filter_placement = FilterPlacement::kPostEmbedding;
      else if (v == "pre_embedding") c.filter_placement = FilterPlacement::kPreEmbedding;
      else throw ConfigError("model config: filter_placement must be 'post_embedding' or 'pre_embedding', got '" + v + "'");
    }
    if (j.contains("activation")) {
      const auto v = j.at("activation").get<std::string>();
      if (v == "gelu") c.activation = numeric::Activation::kGelu;
      else if (v == "relu") c.activation = numeric::Activation::kRelu;
      else throw ConfigError("model config: activation must be 'gelu' or 'relu', got '" + v + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
}

}  // namespace sf::model
