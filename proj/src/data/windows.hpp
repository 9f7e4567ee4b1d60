#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "data/series.hpp"
#include "numeric/tensor.hpp"

namespace sf::data {

// Half-open range of time steps.
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t length() const { return end - begin; }
};

struct SplitSpec {
  enum class Mode { kFractions, kRanges };
  Mode mode = Mode::kFractions;
  // kFractions: train and val shares of T; test takes the rest.
  double train_fraction = 0.7;
  double val_fraction = 0.1;
  // kRanges: segment lengths, laid out back to back from step 0.
  std::size_t train_steps = 0;
  std::size_t val_steps = 0;
  std::size_t test_steps = 0;
  // Let validation and test windows take their inputs from the L steps
  // preceding their segment, so every step of the segment can be a target.
  bool lookback_context = false;

  static SplitSpec standard();  // 0.7 / 0.1 / 0.2
  static SplitSpec ett();       // 0.6 / 0.2 / 0.2
  // 12 / 4 / 4 months of hourly data with lookback context.
  static SplitSpec ett_hourly();

  void validate() const;
};

void to_json(nlohmann::json& j, const SplitSpec& s);
void from_json(const nlohmann::json& j, SplitSpec& s);

struct Splits {
  Segment train;
  Segment val;
  Segment test;
};

// Disjoint, ordered segments that together cover the first T steps used.
Splits resolve_splits(const SplitSpec& spec, std::size_t steps);

// Per-channel z-score statistics (population std, floored to 1 for constant
// channels).
struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> stdev;

  static ChannelStats fit(const RawSeries& rs, const Segment& seg);
  std::vector<double> apply(const RawSeries& rs) const;
};

struct WindowSample {
  std::vector<double> input;   // D x L
  std::vector<double> target;  // D x H
  std::size_t origin = 0;      // first input time step
};

struct Batch {
  numeric::Tensor input;   // [B, D, L]
  numeric::Tensor target;  // [B, D, H]
};

// All sliding windows whose targets lie in one segment.
class WindowSet {
 public:
  WindowSet() = default;
  WindowSet(std::shared_ptr<const std::vector<double>> values, std::size_t channels, std::size_t first_origin,
            std::size_t count, std::size_t lookback, std::size_t horizon);

  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  std::size_t channels() const { return channels_; }
  std::size_t lookback() const { return lookback_; }
  std::size_t horizon() const { return horizon_; }

  WindowSample sample(std::size_t i) const;
  Batch batch(std::span<const std::size_t> indices) const;
  // Windows [begin, min(begin + size, size())).
  Batch range(std::size_t begin, std::size_t size) const;

 private:
  std::shared_ptr<const std::vector<double>> values_;  // T x D, normalized
  std::size_t channels_ = 0;
  std::size_t first_origin_ = 0;
  std::size_t count_ = 0;
  std::size_t lookback_ = 0;
  std::size_t horizon_ = 0;
};

struct WindowedData {
  Splits splits;
  ChannelStats stats;  // from the train segment only
  std::vector<std::string> channel_names;
  WindowSet train;
  WindowSet val;
  WindowSet test;
};

// Windows per segment: length - (L + H) + 1, plus L with lookback context on
// validation and test. Throws InvalidArgument naming a segment that cannot
// hold a single window.
WindowedData make_windows(const RawSeries& rs, const SplitSpec& split, std::size_t lookback, std::size_t horizon);

}  // namespace sf::data
