#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace dualenc {

// Shapes are small (rank <= 3 in practice); data is row-major 64-bit floats.
using Shape = std::vector<int>;

std::size_t numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

namespace detail {

struct TapeNode {
  Shape shape;
  std::vector<double> value;
  bool requires_grad = false;
  std::vector<double> grad;  // sized lazily during backward
  std::vector<std::shared_ptr<TapeNode>> parents;
  // Distributes this node's grad into the parents' grad buffers.
  std::function<void(TapeNode&)> backprop;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

}  // namespace detail

// Thread-local switch: while disabled, ops run forward-only and record no tape.
// Inference over frozen parameters wraps its forward passes in a NoGradGuard,
// which also makes concurrent read-only encoding safe.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool saved_;
};

// Dense tensor participating (optionally) in the gradient tape. Cheap to copy:
// copies share the underlying node.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<detail::TapeNode> node) : node_(std::move(node)) {}

  static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  int rank() const;
  int dim(int axis) const;
  std::size_t size() const;
  bool requires_grad() const;

  const std::vector<double>& values() const;
  // In-place mutation of a leaf's payload (optimizer updates). Graphs built
  // from the old values are stale afterwards; training rebuilds per step.
  std::vector<double>& mutable_values();
  double item() const;  // value of a one-element tensor

  bool has_grad() const;
  const std::vector<double>& grad() const;
  void zero_grad();

  std::shared_ptr<detail::TapeNode> node() const { return node_; }

 private:
  std::shared_ptr<detail::TapeNode> node_;
};

// Reverse-mode sweep from a scalar loss. Accumulates into .grad of every
// reachable tensor with requires_grad (call zero_grad between steps).
void backward(const Tensor& loss);

namespace detail {

// Factory for op results: attaches parents and the backprop closure only when
// grad tracking is on and some parent requires it.
Tensor make_op(Shape shape, std::vector<double> value,
               std::vector<std::shared_ptr<TapeNode>> parents,
               std::function<void(TapeNode&)> backprop);

}  // namespace detail

}  // namespace dualenc
