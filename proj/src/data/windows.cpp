#include "data/windows.hpp"

#include <cmath>
#include <set>

#include "errors.hpp"

namespace sf::data {

using nlohmann::json;

SplitSpec SplitSpec::standard() { return SplitSpec{}; }

SplitSpec SplitSpec::ett() {
  SplitSpec s;
  s.train_fraction = 0.6;
  s.val_fraction = 0.2;
  return s;
}

SplitSpec SplitSpec::ett_hourly() {
  SplitSpec s;
  s.mode = Mode::kRanges;
  s.train_steps = 12 * 30 * 24;
  s.val_steps = 4 * 30 * 24;
  s.test_steps = 4 * 30 * 24;
  s.lookback_context = true;
  return s;
}

void SplitSpec::validate() const {
  if (mode == Mode::kFractions) {
    if (!(train_fraction > 0.0) || !(val_fraction > 0.0) || train_fraction + val_fraction >= 1.0) {
      throw ConfigError("split: fractions must be positive with train + val < 1");
    }
  } else if (train_steps == 0 || val_steps == 0 || test_steps == 0) {
    throw ConfigError("split: train_steps, val_steps and test_steps must be positive");
  }
}

void to_json(json& j, const SplitSpec& s) {
  if (s.mode == SplitSpec::Mode::kFractions) {
    j = json{{"train_fraction", s.train_fraction}, {"val_fraction", s.val_fraction}};
  } else {
    j = json{{"train_steps", s.train_steps}, {"val_steps", s.val_steps}, {"test_steps", s.test_steps}};
  }
  j["lookback_context"] = s.lookback_context;
}

void from_json(const json& j, SplitSpec& s) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "standard") s = SplitSpec::standard();
    else if (name == "ett") s = SplitSpec::ett();
    else if (name == "ett_hourly") s = SplitSpec::ett_hourly();
    else throw ConfigError("split: unknown preset '" + name + "' (standard, ett, ett_hourly)");
    return;
  }
  static const std::set<std::string> known{"train_fraction", "val_fraction", "train_steps",
                                           "val_steps",      "test_steps",   "lookback_context"};
  if (!j.is_object()) throw ConfigError("split: expected a preset name or an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("split: unknown key '" + key + "'");
  }
  try {
    s = SplitSpec{};
    if (j.contains("train_steps") || j.contains("val_steps") || j.contains("test_steps")) {
      s.mode = SplitSpec::Mode::kRanges;
      s.train_steps = j.value("train_steps", std::size_t{0});
      s.val_steps = j.value("val_steps", std::size_t{0});
      s.test_steps = j.value("test_steps", std::size_t{0});
    } else {
      s.train_fraction = j.value("train_fraction", s.train_fraction);
      s.val_fraction = j.value("val_fraction", s.val_fraction);
    }
    s.lookback_context = j.value("lookback_context", false);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("split: ") + e.what());
  }
  s.validate();
}

Splits resolve_splits(const SplitSpec& spec, std::size_t steps) {
  spec.validate();
  Splits s;
  if (spec.mode == SplitSpec::Mode::kFractions) {
    const auto train = static_cast<std::size_t>(std::floor(spec.train_fraction * double(steps)));
    const auto val = static_cast<std::size_t>(std::floor(spec.val_fraction * double(steps)));
    s.train = {0, train};
    s.val = {train, train + val};
    s.test = {train + val, steps};
  } else {
    const std::size_t need = spec.train_steps + spec.val_steps + spec.test_steps;
    if (need > steps) {
      throw DataError("split: needs " + std::to_string(need) + " steps, series has " + std::to_string(steps));
    }
    s.train = {0, spec.train_steps};
    s.val = {s.train.end, s.train.end + spec.val_steps};
    s.test = {s.val.end, s.val.end + spec.test_steps};
  }
  return s;
}

ChannelStats ChannelStats::fit(const RawSeries& rs, const Segment& seg) {
  const std::size_t d = rs.channels();
  ChannelStats st{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  if (seg.length() == 0) throw DataError("normalization: empty train segment");
  for (std::size_t c = 0; c < d; ++c) {
    double m = 0.0;
    for (std::size_t t = seg.begin; t < seg.end; ++t) m += rs.at(t, c);
    m /= double(seg.length());
    double v = 0.0;
    for (std::size_t t = seg.begin; t < seg.end; ++t) v += (rs.at(t, c) - m) * (rs.at(t, c) - m);
    v /= double(seg.length());
    st.mean[c] = m;
    st.stdev[c] = v > 0.0 ? std::sqrt(v) : 1.0;
  }
  return st;
}

std::vector<double> ChannelStats::apply(const RawSeries& rs) const {
  const std::size_t d = rs.channels();
  if (mean.size() != d) throw InvalidArgument("normalization: statistics for " + std::to_string(mean.size()) +
                                              " channels, series has " + std::to_string(d));
  std::vector<double> out(rs.values.size());
  for (std::size_t t = 0; t < rs.steps(); ++t) {
    for (std::size_t c = 0; c < d; ++c) out[t * d + c] = (rs.at(t, c) - mean[c]) / stdev[c];
  }
  return out;
}

WindowSet::WindowSet(std::shared_ptr<const std::vector<double>> values, std::size_t channels,
                     std::size_t first_origin, std::size_t count, std::size_t lookback, std::size_t horizon)
    : values_(std::move(values)),
      channels_(channels),
      first_origin_(first_origin),
      count_(count),
      lookback_(lookback),
      horizon_(horizon) {}

WindowSample WindowSet::sample(std::size_t i) const {
  if (i >= count_) throw InvalidArgument("window index " + std::to_string(i) + " out of range");
  WindowSample s;
  s.origin = first_origin_ + i;
  s.input.resize(channels_ * lookback_);
  s.target.resize(channels_ * horizon_);
  const auto& v = *values_;
  for (std::size_t c = 0; c < channels_; ++c) {
    for (std::size_t t = 0; t < lookback_; ++t) s.input[c * lookback_ + t] = v[(s.origin + t) * channels_ + c];
    for (std::size_t t = 0; t < horizon_; ++t) {
      s.target[c * horizon_ + t] = v[(s.origin + lookback_ + t) * channels_ + c];
    }
  }
  return s;
}

Batch WindowSet::batch(std::span<const std::size_t> indices) const {
  const std::size_t b = indices.size();
  std::vector<double> in(b * channels_ * lookback_), out(b * channels_ * horizon_);
  for (std::size_t k = 0; k < b; ++k) {
    const WindowSample s = sample(indices[k]);
    std::copy(s.input.begin(), s.input.end(), in.begin() + static_cast<std::ptrdiff_t>(k * s.input.size()));
    std::copy(s.target.begin(), s.target.end(), out.begin() + static_cast<std::ptrdiff_t>(k * s.target.size()));
  }
  return {numeric::Tensor({b, channels_, lookback_}, std::move(in)),
          numeric::Tensor({b, channels_, horizon_}, std::move(out))};
}

Batch WindowSet::range(std::size_t begin, std::size_t size) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = begin; i < std::min(begin + size, count_); ++i) idx.push_back(i);
  return batch(idx);
}

WindowedData make_windows(const RawSeries& rs, const SplitSpec& split, std::size_t lookback, std::size_t horizon) {
  if (lookback == 0 || horizon == 0) throw InvalidArgument("windows: lookback and horizon must be positive");
  WindowedData w;
  w.splits = resolve_splits(split, rs.steps());
  w.stats = ChannelStats::fit(rs, w.splits.train);
  w.channel_names = rs.channel_names;
  auto values = std::make_shared<const std::vector<double>>(w.stats.apply(rs));
  const std::size_t span = lookback + horizon;

  auto build = [&](const Segment& seg, const char* name, bool context) {
    const std::size_t begin = context ? (seg.begin >= lookback ? seg.begin - lookback : 0) : seg.begin;
    const std::size_t len = seg.end - begin;
    if (len < span) {
      throw InvalidArgument(std::string("windows: ") + name + " segment [" + std::to_string(seg.begin) + ", " +
                            std::to_string(seg.end) + ") holds " + std::to_string(len) + " steps, needs L + H = " +
                            std::to_string(span));
    }
    return WindowSet(values, rs.channels(), begin, len - span + 1, lookback, horizon);
  };
  w.train = build(w.splits.train, "train", false);
  w.val = build(w.splits.val, "validation", split.lookback_context);
  w.test = build(w.splits.test, "test", split.lookback_context);
  return w;
}

}  // namespace sf::data
