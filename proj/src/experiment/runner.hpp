#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "data/series.hpp"
#include "data/windows.hpp"
#include "experiment/config.hpp"
#include "model/filterformer.hpp"
#include "training/trainer.hpp"

namespace sf::experiment {

struct MetricRow {
  std::string setting;
  std::size_t horizon = 0;
  double mse = 0.0;
  double mae = 0.0;
  std::size_t parameters = 0;
};

struct Report {
  std::string command;
  std::string tag;
  std::vector<MetricRow> rows;
  nlohmann::json details = nlohmann::json::object();
  std::vector<std::string> files;  // written artifacts, in creation order

  nlohmann::json to_json() const;
};

// Mean per-bin amplitude of the signals entering and leaving one filter.
struct SpectrumSnapshot {
  std::vector<double> filter;  // |transfer function|
  std::vector<double> pre;
  std::vector<double> post;

  // Mean post/pre ratio over the lowest third of bins and over the rest.
  double low_ratio() const;
  double high_ratio() const;
};

// Loads the configured dataset (or synthesizes it) and drops excluded channels.
data::RawSeries load_dataset(const ExperimentConfig& cfg);

struct TrainedModel {
  std::unique_ptr<model::Forecaster> model;
  training::FitResult fit;
  training::Metrics test;
  std::size_t parameters = 0;
};

// Builds, trains and tests one model on prepared windows.
TrainedModel train_model(const ExperimentConfig& cfg, const model::ModelConfig& mcfg, const data::WindowedData& w,
                         const std::string& label);

// Spectra of every filter for a probe batch, in block order. Throws
// ConfigError when the model has no spectral filters.
std::vector<SpectrumSnapshot> probe_spectra(model::Forecaster& model, const data::WindowSet& windows,
                                            std::size_t max_windows);

Report run(const ExperimentConfig& cfg);
Report ablate_layers(const ExperimentConfig& cfg);
Report ablate_alpha(const ExperimentConfig& cfg);
Report ablate_placement(const ExperimentConfig& cfg);
Report export_spectra(const ExperimentConfig& cfg);
Report param_count(const ExperimentConfig& cfg);
Report synth(const ExperimentConfig& cfg);

}  // namespace sf::experiment
