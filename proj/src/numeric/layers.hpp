#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "numeric/ops.hpp"
#include "numeric/random.hpp"
#include "numeric/tensor.hpp"

namespace sf::numeric {

// Per-call forward settings. Dropout draws from `rng` when training.
struct ForwardContext {
  bool training = false;
  Rng* rng = nullptr;
};

// Flat view over a module's trainable tensors and non-trainable buffers,
// in registration order. Buffer pointers stay valid while the owning module
// is alive and not moved.
struct StateRegistry {
  struct Parameter {
    std::string name;
    Tensor tensor;
  };
  struct Buffer {
    std::string name;
    std::vector<double>* values;
  };

  std::vector<Parameter> parameters;
  std::vector<Buffer> buffers;

  void add(const std::string& name, const Tensor& t) { parameters.push_back({name, t}); }
  void add_buffer(const std::string& name, std::vector<double>& v) { buffers.push_back({name, &v}); }

  std::size_t parameter_count() const;
};

// Xavier-uniform weights, zero biases.
Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);
Tensor normal_parameter(Shape shape, double stddev, Rng& rng);
Tensor constant_parameter(Shape shape, double value);

// y = x W + b with W: [in, out].
class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng& rng);

  Tensor forward(const Tensor& x) const;
  void register_state(const std::string& prefix, StateRegistry& reg) const;

  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }
  const Tensor& weight() const { return weight_; }
  const Tensor& bias() const { return bias_; }

 private:
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  Tensor weight_;
  Tensor bias_;
};

// Batch normalization over every axis but the last: each of the C features
// is normalized with statistics over all leading positions. Running
// statistics follow the exponential update with `momentum` and are used in
// evaluation mode.
class BatchNorm {
 public:
  BatchNorm() = default;
  explicit BatchNorm(std::size_t features, double momentum = 0.1, double eps = 1e-5);

  Tensor forward(const Tensor& x, bool training);
  void register_state(const std::string& prefix, StateRegistry& reg);

  const std::vector<double>& running_mean() const { return running_mean_; }
  const std::vector<double>& running_var() const { return running_var_; }

 private:
  std::size_t features_ = 0;
  double momentum_ = 0.1;
  double eps_ = 1e-5;
  Tensor gamma_;
  Tensor beta_;
  std::vector<double> running_mean_;
  std::vector<double> running_var_;
};

// Per-row normalization over the last axis with a learnable affine map.
class InstanceNorm {
 public:
  InstanceNorm() = default;
  explicit InstanceNorm(std::size_t features, double eps = 1e-5);

  Tensor forward(const Tensor& x) const;
  void register_state(const std::string& prefix, StateRegistry& reg) const;

 private:
  double eps_ = 1e-5;
  Tensor gamma_;
  Tensor beta_;
};

// Two-layer perceptron d -> hidden -> d.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::size_t features, std::size_t hidden, Activation act, double dropout, Rng& rng);

  Tensor forward(const Tensor& x, const ForwardContext& ctx) const;
  void register_state(const std::string& prefix, StateRegistry& reg) const;

 private:
  Linear up_;
  Linear down_;
  Activation act_ = Activation::kGelu;
  double dropout_ = 0.0;
};

// Applies dropout only in training mode with a nonzero rate.
Tensor maybe_dropout(const Tensor& x, double p, const ForwardContext& ctx);

}  // namespace sf::numeric
