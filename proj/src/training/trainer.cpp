#include "training/trainer.hpp"

#include <cmath>
#include <numeric>
#include <set>

#include "errors.hpp"
#include "numeric/parallel.hpp"
#include "numeric/random.hpp"
#include "training/adam.hpp"

namespace sf::training {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("train: learning_rate must be >= 0");
  if (batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
  if (max_epochs == 0) throw ConfigError("train: max_epochs must be >= 1");
  if (patience == 0) throw ConfigError("train: patience must be >= 1");
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"learning_rate", c.learning_rate},
           {"batch_size", c.batch_size},
           {"max_epochs", c.max_epochs},
           {"seed", c.seed},
           {"shuffle", c.shuffle},
           {"max_batches_per_epoch", c.max_batches_per_epoch},
           {"max_val_windows", c.max_val_windows}};
  if (c.patience == TrainConfig::kNoPatience) j["patience"] = nullptr;
  else j["patience"] = c.patience;
}

void from_json(const json& j, TrainConfig& c) {
  static const std::set<std::string> known{"learning_rate", "batch_size", "max_epochs",           "patience",
                                           "seed",          "shuffle",    "max_batches_per_epoch", "max_val_windows"};
  if (!j.is_object()) throw ConfigError("train: expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("train: unknown key '" + key + "'");
  }
  try {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    if (j.contains("patience")) {
      c.patience = j.at("patience").is_null() ? TrainConfig::kNoPatience : j.at("patience").get<std::size_t>();
    }
    c.seed = j.value("seed", c.seed);
    c.shuffle = j.value("shuffle", c.shuffle);
    c.max_batches_per_epoch = j.value("max_batches_per_epoch", c.max_batches_per_epoch);
    c.max_val_windows = j.value("max_val_windows", c.max_val_windows);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  c.validate();
}

namespace {

struct Snapshot {
  std::vector<std::vector<double>> parameters;
  std::vector<std::vector<double>> buffers;

  static Snapshot take(numeric::StateRegistry& reg) {
    Snapshot s;
    for (const auto& p : reg.parameters) s.parameters.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
    for (const auto& b : reg.buffers) s.buffers.push_back(*b.values);
    return s;
  }

  void restore(numeric::StateRegistry& reg) const {
    for (std::size_t i = 0; i < parameters.size(); ++i) {
      auto dst = reg.parameters[i].tensor.mutable_data();
      std::copy(parameters[i].begin(), parameters[i].end(), dst.begin());
    }
    for (std::size_t i = 0; i < buffers.size(); ++i) *reg.buffers[i].values = buffers[i];
  }
};

// Evenly spaced subset of [0, n) of at most `limit` indices (all when 0).
std::vector<std::size_t> subsample(std::size_t n, std::size_t limit) {
  std::vector<std::size_t> idx;
  if (limit == 0 || limit >= n) {
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
  } else {
    for (std::size_t k = 0; k < limit; ++k) idx.push_back(k * n / limit);
  }
  return idx;
}

}  // namespace

Metrics evaluate(model::Forecaster& model, const data::WindowSet& windows, std::size_t batch_size,
                 std::size_t max_windows) {
  if (windows.empty()) throw InvalidArgument("evaluate: empty window set");
  if (batch_size == 0) throw InvalidArgument("evaluate: batch_size must be >= 1");
  const auto idx = subsample(windows.size(), max_windows);
  const std::size_t batches = (idx.size() + batch_size - 1) / batch_size;
  std::vector<double> sq(batches, 0.0), ab(batches, 0.0);
  std::vector<std::size_t> counts(batches, 0);
  const std::size_t work = batch_size * windows.channels() * windows.lookback() * 4096;
  numeric::parallel_for(batches, work, [&](std::size_t b0, std::size_t b1) {
    numeric::NoGradGuard guard;
    for (std::size_t b = b0; b < b1; ++b) {
      const std::size_t begin = b * batch_size;
      const std::size_t end = std::min(idx.size(), begin + batch_size);
      const auto batch = windows.batch(std::span<const std::size_t>(idx).subspan(begin, end - begin));
      const numeric::Tensor pred = model.forward(batch.input, false);
      auto p = pred.data();
      auto t = batch.target.data();
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double e = p[i] - t[i];
        sq[b] += e * e;
        ab[b] += std::fabs(e);
      }
      counts[b] = p.size();
    }
  });
  double s = 0.0, a = 0.0;
  std::size_t n = 0;
  for (std::size_t b = 0; b < batches; ++b) {
    s += sq[b];
    a += ab[b];
    n += counts[b];
  }
  return {s / double(n), a / double(n)};
}

FitResult fit(model::Forecaster& model, const data::WindowSet& train, const data::WindowSet& val,
              const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.empty()) throw InvalidArgument("fit: empty training set");
  if (val.empty()) throw InvalidArgument("fit: empty validation set");
  auto& reg = model.state();
  Adam adam(reg.parameters);
  numeric::Rng order_rng(numeric::mix_seed(cfg.seed, 0x5eed));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  FitResult result;
  Snapshot best;
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    if (cfg.shuffle) order_rng.shuffle(order);
    std::size_t batches = (order.size() + cfg.batch_size - 1) / cfg.batch_size;
    if (cfg.max_batches_per_epoch) batches = std::min(batches, cfg.max_batches_per_epoch);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * cfg.batch_size;
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const auto batch = train.batch(std::span<const std::size_t>(order).subspan(begin, end - begin));
      adam.zero_grad();
      numeric::Tensor loss = mse_loss(model.forward(batch.input, true), batch.target);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw NumericError("fit: training loss became non-finite at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(b + 1));
      }
      loss.backward();
      adam.step(cfg.learning_rate);
      loss_sum += value * double(end - begin);
      seen += end - begin;
    }
    EpochRecord rec{epoch, loss_sum / double(seen), evaluate(model, val, 64, cfg.max_val_windows).mse};
    if (!std::isfinite(rec.val_mse)) {
      throw NumericError("fit: validation loss diverged at epoch " + std::to_string(epoch));
    }
    result.curve.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (epoch == 1 || rec.val_mse < result.best_val_mse) {
      result.best_epoch = epoch;
      result.best_val_mse = rec.val_mse;
      best = Snapshot::take(reg);
      stale = 0;
    } else if (++stale >= cfg.patience) {
      result.early_stopped = epoch < cfg.max_epochs;
      break;
    }
  }
  best.restore(reg);
  return result;
}

}  // namespace sf::training
