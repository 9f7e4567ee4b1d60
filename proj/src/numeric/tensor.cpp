#include "numeric/tensor.hpp"

#include <algorithm>
#include <unordered_set>

#include "errors.hpp"

namespace sf::numeric {
namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  bool leaf = true;
  bool released = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  BackwardFn backward;
};

}  // namespace detail

namespace {

thread_local bool g_grad_enabled = true;

std::shared_ptr<detail::Node> make_node(Shape shape, std::vector<double> values) {
  if (element_count(shape) != values.size()) {
    throw InvalidArgument("tensor: shape " + to_string(shape) + " holds " +
                          std::to_string(element_count(shape)) + " elements, got " +
                          std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  return node;
}

}  // namespace

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) {
  const std::size_t n = element_count(shape);
  node_ = make_node(std::move(shape), std::vector<double>(n, fill));
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : node_(make_node(std::move(shape), std::move(values))) {}

Tensor Tensor::scalar(double value) { return Tensor(Shape{}, std::vector<double>{value}); }

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
  Tensor t(std::move(shape), std::move(values));
  t.node_->requires_grad = true;
  return t;
}

Tensor Tensor::from_op(const char* op, Shape shape, std::vector<double> values,
                       std::vector<Tensor> inputs, BackwardFn backward) {
  auto node = make_node(std::move(shape), std::move(values));
  node->op = op;
  node->leaf = false;
  const bool any = std::any_of(inputs.begin(), inputs.end(),
                               [](const Tensor& t) { return t.defined() && t.requires_grad(); });
  if (g_grad_enabled && any) {
    node->requires_grad = true;
    node->backward = std::move(backward);
    node->inputs.reserve(inputs.size());
    for (auto& t : inputs) node->inputs.push_back(t.node_);
  }
  return Tensor(std::move(node));
}

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::size(std::ptrdiff_t axis) const {
  const auto r = static_cast<std::ptrdiff_t>(rank());
  const std::ptrdiff_t a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw InvalidArgument("tensor: axis " + std::to_string(axis) + " out of range for shape " +
                          to_string(shape()));
  }
  return node_->shape[static_cast<std::size_t>(a)];
}

std::size_t Tensor::numel() const { return node_->value.size(); }

std::span<const double> Tensor::data() const { return node_->value; }

std::span<double> Tensor::mutable_data() {
  if (node_->backward) {
    throw InvalidArgument(std::string("tensor: cannot mutate recorded result of '") + node_->op + "'");
  }
  return node_->value;
}

double Tensor::item() const {
  if (numel() != 1) {
    throw InvalidArgument("tensor: item() needs one element, shape is " + to_string(shape()));
  }
  return node_->value.front();
}

bool Tensor::requires_grad() const { return node_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool flag) {
  if (!node_->leaf) throw InvalidArgument("tensor: requires_grad can only be set on leaves");
  node_->requires_grad = flag;
  return *this;
}

bool Tensor::is_leaf() const { return node_->leaf; }

const char* Tensor::op_name() const { return node_->op; }

bool Tensor::has_grad() const { return !node_->grad.empty(); }

std::span<const double> Tensor::grad() const { return node_->grad; }

std::span<double> Tensor::mutable_grad() {
  if (node_->grad.empty()) node_->grad.assign(node_->value.size(), 0.0);
  return node_->grad;
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return Tensor(node_->shape, node_->value); }

void Tensor::backward() const {
  if (numel() != 1) {
    throw InvalidArgument("backward: loss must be a scalar, got shape " + to_string(shape()));
  }
  if (node_->released) {
    throw InvalidArgument("backward: computation record already consumed; run a new forward pass");
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      detail::Node* child = node->inputs[next++].get();
      if (child->released) {
        throw InvalidArgument(std::string("backward: intermediate '") + child->op +
                              "' belongs to an already consumed record");
      }
      if (child->requires_grad && !child->leaf && seen.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  node_->grad.assign(1, 1.0);
  std::vector<std::vector<double>*> sinks;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->grad.empty()) node->grad.assign(node->value.size(), 0.0);
    sinks.clear();
    for (auto& in : node->inputs) {
      if (in->requires_grad) {
        if (in->grad.empty()) in->grad.assign(in->value.size(), 0.0);
        sinks.push_back(&in->grad);
      } else {
        sinks.push_back(nullptr);
      }
    }
    node->backward(node->grad, sinks);
  }

  for (detail::Node* node : order) {
    node->backward = nullptr;
    node->inputs.clear();
    node->grad.clear();
    node->grad.shrink_to_fit();
    node->released = true;
  }
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

}  // namespace sf::numeric
