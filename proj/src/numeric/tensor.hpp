#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sf::numeric {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string to_string(const Shape& shape);

// Receives the gradient of an op's output and accumulates into the gradients
// of its inputs. input_grads[i] is null when input i needs no gradient.
using BackwardFn = std::function<void(std::span<const double> out_grad,
                                      std::span<std::vector<double>* const> input_grads)>;

namespace detail {
struct Node;
}

// Dense row-major array of doubles with an optional gradient slot.
//
// A Tensor is a handle: copies share storage and graph position. Values
// produced by ops are never mutated afterwards; only leaves (parameters,
// inputs) expose mutable storage. When any input requires a gradient and
// recording is enabled, an op result remembers how to push gradients back to
// its inputs. backward() walks that record once, in reverse topological
// order, and then releases it.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value);
  // Trainable leaf.
  static Tensor parameter(Shape shape, std::vector<double> values);

  // Result of an op. Records `backward` if gradients are enabled and any input
  // requires them; otherwise returns a constant.
  static Tensor from_op(const char* op, Shape shape, std::vector<double> values,
                        std::vector<Tensor> inputs, BackwardFn backward);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  // Negative axes count from the end.
  std::size_t size(std::ptrdiff_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  // Leaves only.
  std::span<double> mutable_data();
  double item() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool flag);
  bool is_leaf() const;
  const char* op_name() const;

  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Constant copy of the values, detached from any recorded computation.
  Tensor detach() const;

  // Accumulates d(this)/d(leaf) into every reachable leaf that requires a
  // gradient. `this` must hold a single element. The record is released
  // afterwards; calling backward() again on the same result throws.
  void backward() const;

  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

bool grad_enabled();

// Disables recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace sf::numeric
