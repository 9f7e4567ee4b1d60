#include "data/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "errors.hpp"
#include "numeric/random.hpp"

namespace sf::data {

using nlohmann::json;

void SyntheticSpec::validate() const {
  for (std::size_t i = 0; i < components.size(); ++i) {
    const double f = components[i].frequency;
    if (!(f > 0.0) || !(f < 0.5)) {
      throw ConfigError("synthetic: frequency " + std::to_string(f) + " of component " + std::to_string(i) +
                        " must lie in (0, 0.5) cycles per sample");
    }
    if (i > 0 && !(components[i - 1].frequency < f)) {
      throw ConfigError("synthetic: frequencies must be strictly increasing");
    }
    if (!std::isfinite(components[i].amplitude) || !std::isfinite(components[i].phase)) {
      throw ConfigError("synthetic: amplitude and phase must be finite");
    }
  }
  if (length < 2) throw ConfigError("synthetic: length must be >= 2");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("synthetic: noise must be finite and >= 0");
}

void to_json(json& j, const SyntheticSpec& s) {
  json comps = json::array();
  for (const auto& c : s.components) {
    comps.push_back({{"amplitude", c.amplitude}, {"frequency", c.frequency}, {"phase", c.phase}});
  }
  j = json{{"components", comps}, {"length", s.length}, {"noise", s.noise}};
}

void from_json(const json& j, SyntheticSpec& s) {
  static const std::set<std::string> known{"components", "length", "noise"};
  static const std::set<std::string> known_component{"amplitude", "frequency", "phase"};
  if (!j.is_object()) throw ConfigError("synthetic: expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("synthetic: unknown key '" + key + "'");
  }
  try {
    if (j.contains("components")) {
      const auto& comps = j.at("components");
      if (!comps.is_array() || comps.size() != 3) throw ConfigError("synthetic: 'components' must list exactly 3 sines");
      for (std::size_t i = 0; i < 3; ++i) {
        for (const auto& [key, value] : comps[i].items()) {
          if (!known_component.count(key)) throw ConfigError("synthetic: unknown component key '" + key + "'");
        }
        s.components[i].amplitude = comps[i].value("amplitude", 0.0);
        s.components[i].frequency = comps[i].value("frequency", 0.0);
        s.components[i].phase = comps[i].value("phase", 0.0);
      }
    }
    s.length = j.value("length", s.length);
    s.noise = j.value("noise", s.noise);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synthetic: ") + e.what());
  }
  s.validate();
}

RawSeries synth_three_sine(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  RawSeries rs;
  rs.channel_names = {"signal"};
  rs.values.resize(spec.length);
  numeric::Rng rng(seed);
  for (std::size_t t = 0; t < spec.length; ++t) {
    double x = 0.0;
    for (const auto& c : spec.components) {
      x += c.amplitude * std::sin(2.0 * std::numbers::pi * c.frequency * double(t) + c.phase);
    }
    if (spec.noise > 0.0) x += rng.normal(0.0, spec.noise);
    rs.values[t] = x;
    rs.timestamps.push_back(std::to_string(t));
  }
  return rs;
}

}  // namespace sf::data
