#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "data/synthetic.hpp"
#include "data/windows.hpp"
#include "model/config.hpp"
#include "training/trainer.hpp"

namespace sf::experiment {

struct DatasetSource {
  std::string path;                                // CSV file
  std::optional<data::SyntheticSpec> synthetic;    // used when path is empty
  std::string frequency;                           // informational
};

struct AblationConfig {
  std::vector<std::size_t> attention_layers{0, 1, 2, 3};
  std::size_t spectral_blocks = 2;
  std::vector<std::size_t> alphas{0, 1, 2, 3, 4, 5, 6};
  std::size_t total_layers = 6;
};

struct ExperimentConfig {
  std::string tag = "run";
  DatasetSource dataset;
  model::ModelConfig model;
  training::TrainConfig train;
  data::SplitSpec split;
  std::vector<std::string> exclude_channels;
  std::vector<std::size_t> horizons;  // empty: model.horizon
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  AblationConfig ablation;
  std::string checkpoint;  // export-spectra: trained model to inspect
  std::size_t probe_windows = 32;
  std::size_t eval_batch_size = 64;

  std::vector<std::size_t> effective_horizons() const;

  // Throws ConfigError for inconsistent settings or missing input files.
  void validate() const;

  // Parses JSON text. Relative dataset and checkpoint paths are resolved
  // against base_dir when it is non-empty.
  static ExperimentConfig parse(const std::string& text, const std::string& base_dir = "");
  static ExperimentConfig load(const std::string& path);
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

// Parses "96,192" style lists.
std::vector<std::size_t> parse_size_list(const std::string& text);
std::vector<std::string> parse_string_list(const std::string& text);

}  // namespace sf::experiment
