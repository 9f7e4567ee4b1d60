#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <json.hpp>

#include "data/windows.hpp"
#include "model/filterformer.hpp"
#include "training/metrics.hpp"

namespace sf::training {

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 50;
  std::size_t patience = 15;
  std::uint64_t seed = 0;
  bool shuffle = true;
  // Upper bound on optimizer steps per epoch (0: every batch).
  std::size_t max_batches_per_epoch = 0;
  // Upper bound on validation windows scored per epoch, evenly spaced (0: all).
  std::size_t max_val_windows = 0;

  static constexpr std::size_t kNoPatience = std::numeric_limits<std::size_t>::max();

  // Throws ConfigError.
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct FitResult {
  std::vector<EpochRecord> curve;
  std::size_t best_epoch = 0;
  double best_val_mse = 0.0;
  bool early_stopped = false;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Adam on MSE with a constant learning rate. After every epoch the model is
// scored on `val`; training stops after `patience` epochs without a strict
// improvement, and the parameters and buffers of the best epoch (earliest on
// ties) are restored. A non-finite loss throws NumericError naming the epoch.
FitResult fit(model::Forecaster& model, const data::WindowSet& train, const data::WindowSet& val,
              const TrainConfig& cfg, const EpochCallback& on_epoch = {});

// MSE and MAE over every window of the set, in evaluation mode. Batches may
// be scored in parallel; sums are reduced in batch order.
Metrics evaluate(model::Forecaster& model, const data::WindowSet& windows, std::size_t batch_size = 64,
                 std::size_t max_windows = 0);

}  // namespace sf::training
