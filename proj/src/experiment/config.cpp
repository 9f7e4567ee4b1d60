#include "experiment/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "errors.hpp"

namespace sf::experiment {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void check_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

std::string resolve(const std::string& path, const std::string& base) {
  if (path.empty() || base.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

}  // namespace

std::vector<std::size_t> ExperimentConfig::effective_horizons() const {
  return horizons.empty() ? std::vector<std::size_t>{model.horizon} : horizons;
}

void ExperimentConfig::validate() const {
  if (dataset.path.empty() && !dataset.synthetic) throw ConfigError("experiment: dataset needs 'path' or 'synthetic'");
  if (!dataset.path.empty() && !fs::exists(dataset.path)) {
    throw ConfigError("experiment: dataset '" + dataset.path + "' does not exist");
  }
  if (dataset.synthetic) dataset.synthetic->validate();
  if (!checkpoint.empty() && !fs::exists(checkpoint)) {
    throw ConfigError("experiment: checkpoint '" + checkpoint + "' does not exist");
  }
  if (output_dir.empty()) throw ConfigError("experiment: output_dir must not be empty");
  for (std::size_t h : effective_horizons()) {
    if (h == 0) throw ConfigError("experiment: horizons must be positive");
  }
  if (probe_windows == 0) throw ConfigError("experiment: probe_windows must be >= 1");
  if (eval_batch_size == 0) throw ConfigError("experiment: eval_batch_size must be >= 1");
  model::ModelConfig m = model;
  m.horizon = effective_horizons().front();
  m.validate();
  train.validate();
  split.validate();
}

ExperimentConfig ExperimentConfig::parse(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment: invalid JSON: ") + e.what());
  }
  ExperimentConfig c = j.get<ExperimentConfig>();
  c.dataset.path = resolve(c.dataset.path, base_dir);
  c.checkpoint = resolve(c.checkpoint, base_dir);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("experiment: cannot read config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), fs::path(path).parent_path().string());
}

void to_json(json& j, const ExperimentConfig& c) {
  json dataset = json::object();
  if (!c.dataset.path.empty()) dataset["path"] = c.dataset.path;
  if (c.dataset.synthetic) dataset["synthetic"] = *c.dataset.synthetic;
  if (!c.dataset.frequency.empty()) dataset["frequency"] = c.dataset.frequency;
  j = json{{"tag", c.tag},
           {"dataset", dataset},
           {"model", c.model},
           {"train", c.train},
           {"split", c.split},
           {"exclude_channels", c.exclude_channels},
           {"horizons", c.effective_horizons()},
           {"output_dir", c.output_dir},
           {"seed", c.seed},
           {"ablation",
            {{"attention_layers", c.ablation.attention_layers},
             {"spectral_blocks", c.ablation.spectral_blocks},
             {"alphas", c.ablation.alphas},
             {"total_layers", c.ablation.total_layers}}},
           {"probe_windows", c.probe_windows},
           {"eval_batch_size", c.eval_batch_size}};
  if (!c.checkpoint.empty()) j["checkpoint"] = c.checkpoint;
}

void from_json(const json& j, ExperimentConfig& c) {
  check_keys(j,
             {"tag", "dataset", "model", "train", "split", "exclude_channels", "horizons", "output_dir", "seed",
              "ablation", "checkpoint", "probe_windows", "eval_batch_size"},
             "experiment");
  try {
    c.tag = j.value("tag", c.tag);
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      check_keys(d, {"path", "synthetic", "frequency"}, "dataset");
      c.dataset.path = d.value("path", std::string());
      if (d.contains("synthetic")) c.dataset.synthetic = d.at("synthetic").get<data::SyntheticSpec>();
      c.dataset.frequency = d.value("frequency", std::string());
    }
    if (j.contains("model")) c.model = j.at("model").get<model::ModelConfig>();
    if (j.contains("train")) c.train = j.at("train").get<training::TrainConfig>();
    if (j.contains("split")) c.split = j.at("split").get<data::SplitSpec>();
    if (j.contains("exclude_channels")) {
      c.exclude_channels.clear();
      for (const auto& e : j.at("exclude_channels")) {
        c.exclude_channels.push_back(e.is_number_unsigned() ? std::to_string(e.get<std::size_t>()) : e.get<std::string>());
      }
    }
    c.horizons = j.value("horizons", c.horizons);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.seed = j.value("seed", c.seed);
    if (j.contains("ablation")) {
      const auto& a = j.at("ablation");
      check_keys(a, {"attention_layers", "spectral_blocks", "alphas", "total_layers"}, "ablation");
      c.ablation.attention_layers = a.value("attention_layers", c.ablation.attention_layers);
      c.ablation.spectral_blocks = a.value("spectral_blocks", c.ablation.spectral_blocks);
      c.ablation.alphas = a.value("alphas", c.ablation.alphas);
      c.ablation.total_layers = a.value("total_layers", c.ablation.total_layers);
    }
    c.checkpoint = j.value("checkpoint", c.checkpoint);
    c.probe_windows = j.value("probe_windows", c.probe_windows);
    c.eval_batch_size = j.value("eval_batch_size", c.eval_batch_size);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment: ") + e.what());
  }
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : parse_string_list(text)) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError("'" + item + "' is not a non-negative integer");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> parse_string_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace sf::experiment
