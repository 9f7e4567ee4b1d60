#include "model/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace sf::model {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'S', 'F', 'C', 'K', 'P', 'T', '0', '1'};
constexpr const char* kFormat = "spectral_forecaster.checkpoint.v1";

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
  return v;
}

struct Slot {
  std::string name;
  std::string kind;
  std::vector<std::size_t> shape;
  std::span<const double> values;
  std::span<double> target;
};

std::vector<Slot> slots(numeric::StateRegistry& reg) {
  std::vector<Slot> out;
  for (auto& p : reg.parameters) {
    out.push_back({p.name, "parameter", p.tensor.shape(), p.tensor.data(), p.tensor.mutable_data()});
  }
  for (auto& b : reg.buffers) {
    out.push_back({b.name, "buffer", {b.values->size()}, *b.values, *b.values});
  }
  return out;
}

}  // namespace

void save_checkpoint(const std::string& path, Forecaster& model, std::uint64_t seed) {
  json header;
  header["format"] = kFormat;
  header["model"] = model.config();
  header["seed"] = seed;
  json tensors = json::array();
  std::string payload;
  std::size_t offset = 0;
  for (const auto& s : slots(model.state())) {
    tensors.push_back({{"name", s.name}, {"kind", s.kind}, {"shape", s.shape}, {"offset", offset}});
    for (double v : s.values) put_u64(payload, std::bit_cast<std::uint64_t>(v));
    offset += s.values.size();
  }
  header["tensors"] = std::move(tensors);
  const std::string text = header.dump();

  std::string blob(kMagic, sizeof kMagic);
  put_u64(blob, text.size());
  blob += text;
  blob += payload;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("checkpoint: cannot open '" + path + "' for writing");
  f.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!f) throw IoError("checkpoint: write to '" + path + "' failed");
}

std::unique_ptr<Forecaster> load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("checkpoint: cannot open '" + path + "'");
  std::vector<unsigned char> blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (blob.size() < 16 || std::memcmp(blob.data(), kMagic, sizeof kMagic) != 0) {
    throw IoError("checkpoint: '" + path + "' is not a checkpoint file");
  }
  const std::uint64_t header_len = get_u64(blob.data() + 8);
  if (header_len > blob.size() - 16) throw IoError("checkpoint: truncated header in '" + path + "'");
  json header;
  try {
    header = json::parse(blob.begin() + 16, blob.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const json::exception& e) {
    throw IoError("checkpoint: bad header in '" + path + "': " + e.what());
  }
  if (header.value("format", "") != kFormat) throw IoError("checkpoint: unsupported format in '" + path + "'");

  const ModelConfig cfg = header.at("model").get<ModelConfig>();
  auto model = make_forecaster(cfg, header.value("seed", std::uint64_t{0}));
  const unsigned char* payload = blob.data() + 16 + header_len;
  const std::size_t payload_values = (blob.size() - 16 - header_len) / 8;

  auto targets = slots(model->state());
  const auto& entries = header.at("tensors");
  if (entries.size() != targets.size()) {
    throw IoError("checkpoint: '" + path + "' holds " + std::to_string(entries.size()) + " tensors, model has " +
                  std::to_string(targets.size()));
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& e = entries[i];
    auto& t = targets[i];
    const auto shape = e.at("shape").get<std::vector<std::size_t>>();
    if (e.at("name").get<std::string>() != t.name || shape != t.shape) {
      throw IoError("checkpoint: tensor " + std::to_string(i) + " is '" + e.at("name").get<std::string>() +
                    "', expected '" + t.name + "' with matching shape");
    }
    const std::size_t offset = e.at("offset").get<std::size_t>();
    if (offset + t.target.size() > payload_values) throw IoError("checkpoint: truncated payload in '" + path + "'");
    for (std::size_t k = 0; k < t.target.size(); ++k) {
      t.target[k] = std::bit_cast<double>(get_u64(payload + 8 * (offset + k)));
    }
  }
  return model;
}

void copy_state(Forecaster& from, Forecaster& to) {
  auto src = slots(from.state());
  auto dst = slots(to.state());
  if (src.size() != dst.size()) throw InvalidArgument("copy_state: models have different layouts");
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i].name != dst[i].name || src[i].values.size() != dst[i].target.size()) {
      throw InvalidArgument("copy_state: tensor '" + src[i].name + "' does not match '" + dst[i].name + "'");
    }
    std::copy(src[i].values.begin(), src[i].values.end(), dst[i].target.begin());
  }
}

}  // namespace sf::model
