#pragma once

// Minimal reverse-mode automatic differentiation over dense row-major
// double tensors. A Tensor is a cheap handle to a graph node; ops build new
// nodes that remember their parents, and backward() walks the graph in
// reverse topological order.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace privae::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {
struct Node;
}

class Tensor {
 public:
  Tensor() = default;

  /// Value that never receives gradients.
  static Tensor constant(Shape shape, std::vector<double> values);
  /// Leaf that accumulates gradients (model parameters, test inputs).
  static Tensor variable(Shape shape, std::vector<double> values);
  static Tensor scalar(double value);
  static Tensor full(Shape shape, double value);

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  std::size_t dim(std::size_t axis) const;

  std::span<const double> values() const;
  std::span<const double> grad() const;
  /// Writable view of a leaf's values. Throws for op results, whose values
  /// are frozen once the graph is built.
  std::span<double> mutable_values();
  double item() const;

  bool requires_grad() const;
  bool is_leaf() const;
  void zero_grad();

  const detail::Node* node() const noexcept { return node_.get(); }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;

  friend struct detail::Node;
  friend Tensor detail_make(std::shared_ptr<detail::Node>);
  friend std::shared_ptr<detail::Node> detail_node(const Tensor&);
};

/// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

struct Parameter {
  std::string name;
  Tensor tensor;
};

// Elementwise ops broadcast numpy-style (shapes aligned on the right).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor neg(const Tensor& x);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double offset);
Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor square(const Tensor& x);
Tensor softplus(const Tensor& x);
Tensor abs(const Tensor& x);
/// Gradient is zero where the input lies outside [lo, hi].
Tensor clamp(const Tensor& x, double lo, double hi);

/// [m, k] x [k, n] -> [m, n]
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor sum(const Tensor& x);
Tensor sum(const Tensor& x, std::size_t axis);
Tensor mean(const Tensor& x);
Tensor mean(const Tensor& x, std::size_t axis);
/// Numerically stable log(sum(exp(x))) along one axis; the axis is removed.
Tensor logsumexp(const Tensor& x, std::size_t axis);

Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length);
Tensor reshape(const Tensor& x, Shape shape);
Tensor broadcast_to(const Tensor& x, const Shape& shape);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator-(const Tensor& x) { return neg(x); }
inline Tensor operator*(double s, const Tensor& x) { return scale(x, s); }
inline Tensor operator*(const Tensor& x, double s) { return scale(x, s); }
inline Tensor operator+(const Tensor& x, double s) { return add_scalar(x, s); }
inline Tensor operator-(const Tensor& x, double s) { return add_scalar(x, -s); }

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op);

/// Accumulates d(loss)/d(leaf) into every reachable leaf. `loss` must have
/// shape []. Intermediate gradients are recomputed on each call; leaf
/// gradients add up until zero_grad().
void backward(const Tensor& loss);

/// Largest |analytic - central difference| / max(1, |analytic|) over every
/// entry of every parameter. `f` must rebuild its graph on each call.
double grad_check(const std::function<Tensor()>& f, std::span<Parameter> params,
                  double h = 1e-4);

}  // namespace privae::ad
