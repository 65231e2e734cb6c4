#include "dualenc/tensor.hpp"

#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace dualenc {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ')';
  return os.str();
}

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : saved_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = saved_; }

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor dims must be positive, got " + shape_to_string(shape));
  }
  if (numel(shape) != data.size()) {
    throw std::invalid_argument("tensor data size " + std::to_string(data.size()) +
                                " does not match shape " + shape_to_string(shape));
  }
  auto node = std::make_shared<detail::TapeNode>();
  node->shape = std::move(shape);
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<double> data(numel(shape), 0.0);
  return from_data(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> data(numel(shape), value);
  return from_data(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::scalar(double value) { return from_data({1}, {value}); }

const Shape& Tensor::shape() const { return node_->shape; }
int Tensor::rank() const { return static_cast<int>(node_->shape.size()); }
int Tensor::dim(int axis) const { return node_->shape.at(static_cast<std::size_t>(axis)); }
std::size_t Tensor::size() const { return node_->value.size(); }
bool Tensor::requires_grad() const { return node_->requires_grad; }

const std::vector<double>& Tensor::values() const { return node_->value; }
std::vector<double>& Tensor::mutable_values() { return node_->value; }

double Tensor::item() const {
  if (size() != 1) {
    throw std::invalid_argument("item() requires a one-element tensor, got shape " +
                                shape_to_string(shape()));
  }
  return node_->value[0];
}

bool Tensor::has_grad() const { return node_ && node_->grad.size() == node_->value.size(); }

const std::vector<double>& Tensor::grad() const {
  if (!has_grad()) throw std::logic_error("tensor has no gradient; run backward() first");
  return node_->grad;
}

void Tensor::zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

void backward(const Tensor& loss) {
  if (!loss.defined()) throw std::invalid_argument("backward: undefined tensor");
  if (loss.size() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                shape_to_string(loss.shape()));
  }
  if (!loss.requires_grad()) {
    throw std::logic_error("backward: loss does not depend on any tensor with requires_grad");
  }

  // Iterative post-order DFS over parent edges gives a topological order.
  std::vector<detail::TapeNode*> order;
  std::unordered_set<detail::TapeNode*> visited;
  struct Frame {
    detail::TapeNode* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({loss.node().get(), 0});
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next_parent < top.node->parents.size()) {
      detail::TapeNode* parent = top.node->parents[top.next_parent++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.push_back({parent, 0});
      }
    } else {
      order.push_back(top.node);
      stack.pop_back();
    }
  }

  // Interior grads are scratch space for this sweep; only leaves accumulate
  // across calls.
  for (detail::TapeNode* node : order) {
    if (node->backprop) node->grad.assign(node->value.size(), 0.0);
  }
  loss.node()->ensure_grad();
  loss.node()->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::TapeNode* node = *it;
    node->ensure_grad();
    if (node->backprop) node->backprop(*node);
  }
}

namespace detail {

Tensor make_op(Shape shape, std::vector<double> value,
               std::vector<std::shared_ptr<TapeNode>> parents,
               std::function<void(TapeNode&)> backprop) {
  auto node = std::make_shared<TapeNode>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool any_grad = false;
  for (const auto& p : parents) any_grad = any_grad || p->requires_grad;
  if (grad_enabled() && any_grad) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backprop = std::move(backprop);
  }
  return Tensor(std::move(node));
}

}  // namespace detail

}  // namespace dualenc
