#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "model/filterformer.hpp"

namespace sf::model {

// Layout: 8-byte magic "SFCKPT01", u64 little-endian header length, JSON
// header {format, model, seed, tensors:[{name, kind, shape, offset}]}, then
// the tensor payload as little-endian f64, offsets counted in values.
void save_checkpoint(const std::string& path, Forecaster& model, std::uint64_t seed = 0);

// Rebuilds the model from the stored config and overwrites every parameter
// and buffer with the stored values. Throws IoError on malformed files.
std::unique_ptr<Forecaster> load_checkpoint(const std::string& path);

// Copies parameter and buffer values between two models of identical layout.
void copy_state(Forecaster& from, Forecaster& to);

}  // namespace sf::model
