#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace attnbn::num {

/// Row-major extents. Feature maps are laid out as [rows, cols, channels].
using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool has_grad = false;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward_fn;

  std::vector<double>& grad_buffer();
};

}  // namespace detail

/// Handle to an immutable node in a reverse-mode computation graph.
///
/// Copies share the node. Values are never mutated after construction; an
/// optimizer "updates" a parameter by replacing the handle with a fresh leaf.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor zeros(Shape shape);
  static Tensor filled(Shape shape, double value);
  /// Leaf that accumulates gradients.
  static Tensor parameter(Shape shape, std::vector<double> values);

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<const double> values() const;
  double operator[](std::size_t i) const { return values()[i]; }
  /// Value of a single-element tensor.
  double item() const;

  bool requires_grad() const;
  bool is_leaf() const;
  /// Empty span when no gradient has been accumulated.
  std::span<const double> grad() const;
  void zero_grad() const;

  /// Same values, cut from the graph.
  Tensor detach() const;

  const std::shared_ptr<detail::Node>& node() const noexcept { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Reverse pass from a scalar loss. Intermediate gradients are reset at the
/// start of every call; leaf gradients accumulate until zero_grad().
void backward(const Tensor& loss);

/// Number of nodes the last backward() visited (diagnostics and tests).
std::size_t last_backward_node_count();

bool grad_enabled();

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

namespace detail {

/// Builds an op result. Parents and backward_fn are dropped when no parent
/// requires grad or recording is disabled. Throws kNonFinite on NaN/Inf output.
Tensor make_result(Shape shape, std::vector<double> value, std::vector<Tensor> parents,
                   std::function<void(Node&)> backward_fn, const char* op_name);

}  // namespace detail

}  // namespace attnbn::num
