#include "privae/autodiff.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace privae::ad {

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;
  bool requires_grad = false;
  bool leaf = true;
};

}  // namespace detail

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

Tensor detail_make(NodePtr node) { return Tensor(std::move(node)); }
NodePtr detail_node(const Tensor& t) {
  if (!t.node_) throw std::invalid_argument("use of an undefined Tensor");
  return t.node_;
}

namespace {

thread_local bool g_grad_enabled = true;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

NodePtr make_leaf(Shape shape, std::vector<double> values, bool requires_grad) {
  if (numel(shape) != values.size()) {
    throw ShapeError("tensor of shape " + to_string(shape) + " given " +
                     std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<Node>();
  node->grad.assign(values.size(), 0.0);
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return node;
}

Tensor make_result(Shape shape, std::vector<double> values, std::vector<NodePtr> parents,
                   std::function<void(Node&)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->grad.assign(node->value.size(), 0.0);
  node->leaf = false;
  bool needs = false;
  if (g_grad_enabled) {
    for (const auto& p : parents) needs = needs || p->requires_grad;
  }
  if (needs) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward_fn = std::move(backward_fn);
  }
  return detail_make(std::move(node));
}

// Maps each flat index of `out` to the flat index of a right-aligned,
// broadcast-compatible `in`.
std::vector<std::size_t> broadcast_index(const Shape& in, const Shape& out) {
  const std::size_t rank = out.size();
  const std::size_t offset = rank - in.size();
  std::vector<std::size_t> in_stride(rank, 0);
  std::size_t stride = 1;
  for (std::size_t k = in.size(); k-- > 0;) {
    in_stride[k + offset] = in[k] == 1 ? 0 : stride;
    stride *= in[k];
  }
  const std::size_t n = numel(out);
  std::vector<std::size_t> idx(n);
  std::vector<std::size_t> counter(rank, 0);
  std::size_t pos = 0;
  for (std::size_t flat = 0; flat < n; ++flat) {
    idx[flat] = pos;
    for (std::size_t k = rank; k-- > 0;) {
      ++counter[k];
      pos += in_stride[k];
      if (counter[k] < out[k]) break;
      pos -= in_stride[k] * counter[k];
      counter[k] = 0;
    }
  }
  return idx;
}

template <class F, class GA, class GB>
Tensor binary_op(const Tensor& a, const Tensor& b, const char* name, F f, GA da, GB db) {
  const NodePtr na = detail_node(a);
  const NodePtr nb = detail_node(b);
  const Shape out_shape = broadcast_shape(na->shape, nb->shape, name);
  const std::size_t n = numel(out_shape);
  std::vector<double> out(n);

  const bool same_a = na->shape == out_shape;
  const bool same_b = nb->shape == out_shape;
  auto ia = std::make_shared<std::vector<std::size_t>>();
  auto ib = std::make_shared<std::vector<std::size_t>>();
  if (!same_a) *ia = broadcast_index(na->shape, out_shape);
  if (!same_b) *ib = broadcast_index(nb->shape, out_shape);

  const double* av = na->value.data();
  const double* bv = nb->value.data();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t ja = same_a ? k : (*ia)[k];
    const std::size_t jb = same_b ? k : (*ib)[k];
    out[k] = f(av[ja], bv[jb]);
  }

  return make_result(out_shape, std::move(out), {na, nb},
                     [ia, ib, same_a, same_b, da, db](Node& self) {
                       Node& pa = *self.parents[0];
                       Node& pb = *self.parents[1];
                       const std::size_t n = self.value.size();
                       for (std::size_t k = 0; k < n; ++k) {
                         const double g = self.grad[k];
                         if (g == 0.0) continue;
                         const std::size_t ja = same_a ? k : (*ia)[k];
                         const std::size_t jb = same_b ? k : (*ib)[k];
                         const double x = pa.value[ja];
                         const double y = pb.value[jb];
                         if (pa.requires_grad) pa.grad[ja] += g * da(x, y, self.value[k]);
                         if (pb.requires_grad) pb.grad[jb] += g * db(x, y, self.value[k]);
                       }
                     });
}

template <class F, class D>
Tensor unary_op(const Tensor& x, F f, D df) {
  const NodePtr nx = detail_node(x);
  std::vector<double> out(nx->value.size());
  std::transform(nx->value.begin(), nx->value.end(), out.begin(), f);
  return make_result(nx->shape, std::move(out), {nx}, [df](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t k = 0; k < self.value.size(); ++k) {
      p.grad[k] += self.grad[k] * df(p.value[k], self.value[k]);
    }
  });
}

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t length = 1;
  std::size_t inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis, const char* op) {
  if (axis >= shape.size()) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) +
                     " out of range for shape " + to_string(shape));
  }
  AxisSplit s;
  for (std::size_t k = 0; k < axis; ++k) s.outer *= shape[k];
  s.length = shape[axis];
  for (std::size_t k = axis + 1; k < shape.size(); ++k) s.inner *= shape[k];
  return s;
}

Shape drop_axis(const Shape& shape, std::size_t axis) {
  Shape out;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (k != axis) out.push_back(shape[k]);
  }
  return out;
}

}  // namespace

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (k) os << ", ";
    os << shape[k];
  }
  os << ']';
  return os.str();
}

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t k = 0; k < rank; ++k) {
    const std::size_t da = k < rank - a.size() ? 1 : a[k - (rank - a.size())];
    const std::size_t db = k < rank - b.size() ? 1 : b[k - (rank - b.size())];
    if (da != db && da != 1 && db != 1) {
      throw ShapeError(std::string(op) + ": shapes " + to_string(a) + " and " + to_string(b) +
                       " do not broadcast");
    }
    out[k] = da == 1 ? db : da;
  }
  return out;
}

// ---- Tensor -----------------------------------------------------------------

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
  return Tensor(make_leaf(std::move(shape), std::move(values), false));
}

Tensor Tensor::variable(Shape shape, std::vector<double> values) {
  return Tensor(make_leaf(std::move(shape), std::move(values), true));
}

Tensor Tensor::scalar(double value) { return constant({}, {value}); }

Tensor Tensor::full(Shape shape, double value) {
  const std::size_t n = numel(shape);
  return constant(std::move(shape), std::vector<double>(n, value));
}

const Shape& Tensor::shape() const { return detail_node(*this)->shape; }
std::size_t Tensor::size() const { return detail_node(*this)->value.size(); }
std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) throw ShapeError("dim: axis out of range for shape " + to_string(s));
  return s[axis];
}

std::span<const double> Tensor::values() const { return detail_node(*this)->value; }
std::span<const double> Tensor::grad() const { return detail_node(*this)->grad; }

std::span<double> Tensor::mutable_values() {
  auto node = detail_node(*this);
  if (!node->leaf) throw std::logic_error("mutable_values: op results are immutable");
  return node->value;
}

double Tensor::item() const {
  auto node = detail_node(*this);
  if (node->value.size() != 1) {
    throw ShapeError("item: tensor of shape " + to_string(node->shape) + " is not a scalar");
  }
  return node->value[0];
}

bool Tensor::requires_grad() const { return detail_node(*this)->requires_grad; }
bool Tensor::is_leaf() const { return detail_node(*this)->leaf; }
void Tensor::zero_grad() {
  auto node = detail_node(*this);
  std::fill(node->grad.begin(), node->grad.end(), 0.0);
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

// ---- elementwise --------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, "add", [](double x, double y) { return x + y; },
      [](double, double, double) { return 1.0; }, [](double, double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double, double) { return 1.0; }, [](double, double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, "mul", [](double x, double y) { return x * y; },
      [](double, double y, double) { return y; }, [](double x, double, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, "div", [](double x, double y) { return x / y; },
      [](double, double y, double) { return 1.0 / y; },
      [](double, double y, double out) { return -out / y; });
}

Tensor neg(const Tensor& x) {
  return unary_op(x, [](double v) { return -v; }, [](double, double) { return -1.0; });
}

Tensor scale(const Tensor& x, double factor) {
  return unary_op(
      x, [factor](double v) { return factor * v; },
      [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double offset) {
  return unary_op(
      x, [offset](double v) { return v + offset; }, [](double, double) { return 1.0; });
}

Tensor relu(const Tensor& x) {
  return unary_op(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary_op(
      x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor exp(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor square(const Tensor& x) {
  return unary_op(
      x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor softplus(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); },
      [](double v, double) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      });
}

Tensor abs(const Tensor& x) {
  return unary_op(
      x, [](double v) { return std::abs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("clamp: lo > hi");
  return unary_op(
      x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

// ---- linear algebra ------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  const NodePtr na = detail_node(a);
  const NodePtr nb = detail_node(b);
  if (na->shape.size() != 2 || nb->shape.size() != 2 || na->shape[1] != nb->shape[0]) {
    throw ShapeError("matmul: shapes " + to_string(na->shape) + " and " + to_string(nb->shape) +
                     " are not [m, k] x [k, n]");
  }
  const auto m = static_cast<Eigen::Index>(na->shape[0]);
  const auto k = static_cast<Eigen::Index>(na->shape[1]);
  const auto n = static_cast<Eigen::Index>(nb->shape[1]);
  std::vector<double> out(static_cast<std::size_t>(m * n));
  Eigen::Map<RowMat>(out.data(), m, n).noalias() =
      Eigen::Map<const RowMat>(na->value.data(), m, k) *
      Eigen::Map<const RowMat>(nb->value.data(), k, n);

  return make_result({na->shape[0], nb->shape[1]}, std::move(out), {na, nb},
                     [m, k, n](Node& self) {
                       Node& pa = *self.parents[0];
                       Node& pb = *self.parents[1];
                       Eigen::Map<const RowMat> g(self.grad.data(), m, n);
                       if (pa.requires_grad) {
                         Eigen::Map<RowMat>(pa.grad.data(), m, k).noalias() +=
                             g * Eigen::Map<const RowMat>(pb.value.data(), k, n).transpose();
                       }
                       if (pb.requires_grad) {
                         Eigen::Map<RowMat>(pb.grad.data(), k, n).noalias() +=
                             Eigen::Map<const RowMat>(pa.value.data(), m, k).transpose() * g;
                       }
                     });
}

// ---- reductions ------------------------------------------------------------------

Tensor sum(const Tensor& x) {
  const NodePtr nx = detail_node(x);
  double total = 0.0;
  for (double v : nx->value) total += v;
  return make_result({}, {total}, {nx}, [](Node& self) {
    Node& p = *self.parents[0];
    const double g = self.grad[0];
    for (double& gi : p.grad) gi += g;
  });
}

Tensor mean(const Tensor& x) {
  const std::size_t n = x.size();
  if (n == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(n));
}

Tensor sum(const Tensor& x, std::size_t axis) {
  const NodePtr nx = detail_node(x);
  const AxisSplit s = split_axis(nx->shape, axis, "sum");
  std::vector<double> out(s.outer * s.inner, 0.0);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t l = 0; l < s.length; ++l) {
      const double* row = nx->value.data() + (o * s.length + l) * s.inner;
      double* dst = out.data() + o * s.inner;
      for (std::size_t i = 0; i < s.inner; ++i) dst[i] += row[i];
    }
  }
  return make_result(drop_axis(nx->shape, axis), std::move(out), {nx}, [s](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t l = 0; l < s.length; ++l) {
        double* dst = p.grad.data() + (o * s.length + l) * s.inner;
        const double* g = self.grad.data() + o * s.inner;
        for (std::size_t i = 0; i < s.inner; ++i) dst[i] += g[i];
      }
    }
  });
}

Tensor mean(const Tensor& x, std::size_t axis) {
  const std::size_t len = x.dim(axis);
  if (len == 0) throw ShapeError("mean: empty axis");
  return scale(sum(x, axis), 1.0 / static_cast<double>(len));
}

Tensor logsumexp(const Tensor& x, std::size_t axis) {
  const NodePtr nx = detail_node(x);
  const AxisSplit s = split_axis(nx->shape, axis, "logsumexp");
  if (s.length == 0) throw ShapeError("logsumexp: empty axis");
  std::vector<double> out(s.outer * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const double* base = nx->value.data() + o * s.length * s.inner + i;
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t l = 0; l < s.length; ++l) peak = std::max(peak, base[l * s.inner]);
      double acc = 0.0;
      if (std::isfinite(peak)) {
        for (std::size_t l = 0; l < s.length; ++l) acc += std::exp(base[l * s.inner] - peak);
        out[o * s.inner + i] = peak + std::log(acc);
      } else {
        out[o * s.inner + i] = peak;
      }
    }
  }
  return make_result(drop_axis(nx->shape, axis), std::move(out), {nx}, [s](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        const double g = self.grad[o * s.inner + i];
        const double lse = self.value[o * s.inner + i];
        if (g == 0.0 || !std::isfinite(lse)) continue;
        const std::size_t base = o * s.length * s.inner + i;
        for (std::size_t l = 0; l < s.length; ++l) {
          const std::size_t j = base + l * s.inner;
          p.grad[j] += g * std::exp(p.value[j] - lse);
        }
      }
    }
  });
}

// ---- structural ---------------------------------------------------------------------

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  std::vector<NodePtr> nodes;
  for (const auto& t : parts) nodes.push_back(detail_node(t));
  Shape out_shape = nodes.front()->shape;
  const AxisSplit first = split_axis(out_shape, axis, "concat");
  std::vector<std::size_t> lengths;
  std::size_t total = 0;
  for (const auto& node : nodes) {
    if (node->shape.size() != out_shape.size()) {
      throw ShapeError("concat: rank mismatch between " + to_string(out_shape) + " and " +
                       to_string(node->shape));
    }
    for (std::size_t k = 0; k < out_shape.size(); ++k) {
      if (k != axis && node->shape[k] != out_shape[k]) {
        throw ShapeError("concat: shapes " + to_string(out_shape) + " and " +
                         to_string(node->shape) + " differ off the concat axis");
      }
    }
    lengths.push_back(node->shape[axis]);
    total += node->shape[axis];
  }
  out_shape[axis] = total;
  const std::size_t outer = first.outer;
  const std::size_t inner = first.inner;
  std::vector<double> out(outer * total * inner);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < nodes.size(); ++p) {
    const std::size_t chunk = lengths[p] * inner;
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(nodes[p]->value.data() + o * chunk, chunk,
                  out.data() + o * total * inner + offset * inner);
    }
    offset += lengths[p];
  }
  return make_result(out_shape, std::move(out), nodes, [lengths, outer, inner, total](Node& self) {
    std::size_t offset = 0;
    for (std::size_t p = 0; p < self.parents.size(); ++p) {
      Node& parent = *self.parents[p];
      const std::size_t chunk = lengths[p] * inner;
      if (parent.requires_grad) {
        for (std::size_t o = 0; o < outer; ++o) {
          const double* g = self.grad.data() + o * total * inner + offset * inner;
          double* dst = parent.grad.data() + o * chunk;
          for (std::size_t i = 0; i < chunk; ++i) dst[i] += g[i];
        }
      }
      offset += lengths[p];
    }
  });
}

Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length) {
  const NodePtr nx = detail_node(x);
  const AxisSplit s = split_axis(nx->shape, axis, "slice");
  if (start + length > s.length) {
    throw ShapeError("slice: range [" + std::to_string(start) + ", " +
                     std::to_string(start + length) + ") exceeds axis " + std::to_string(axis) +
                     " of shape " + to_string(nx->shape));
  }
  Shape out_shape = nx->shape;
  out_shape[axis] = length;
  std::vector<double> out(s.outer * length * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(nx->value.data() + (o * s.length + start) * s.inner, length * s.inner,
                out.data() + o * length * s.inner);
  }
  return make_result(out_shape, std::move(out), {nx}, [s, start, length](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t o = 0; o < s.outer; ++o) {
      const double* g = self.grad.data() + o * length * s.inner;
      double* dst = p.grad.data() + (o * s.length + start) * s.inner;
      for (std::size_t i = 0; i < length * s.inner; ++i) dst[i] += g[i];
    }
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  const NodePtr nx = detail_node(x);
  if (numel(shape) != nx->value.size()) {
    throw ShapeError("reshape: cannot view " + to_string(nx->shape) + " as " + to_string(shape));
  }
  return make_result(std::move(shape), nx->value, {nx}, [](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t k = 0; k < self.grad.size(); ++k) p.grad[k] += self.grad[k];
  });
}

Tensor broadcast_to(const Tensor& x, const Shape& shape) {
  const NodePtr nx = detail_node(x);
  if (broadcast_shape(nx->shape, shape, "broadcast_to") != shape) {
    throw ShapeError("broadcast_to: " + to_string(nx->shape) + " cannot expand to " +
                     to_string(shape));
  }
  auto idx = std::make_shared<std::vector<std::size_t>>(broadcast_index(nx->shape, shape));
  std::vector<double> out(idx->size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = nx->value[(*idx)[k]];
  return make_result(shape, std::move(out), {nx}, [idx](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t k = 0; k < self.grad.size(); ++k) p.grad[(*idx)[k]] += self.grad[k];
  });
}

// ---- backward -------------------------------------------------------------------------

void backward(const Tensor& loss) {
  const NodePtr root = detail_node(loss);
  if (!root->shape.empty()) {
    throw ShapeError("backward: loss must be a scalar of shape [], got " + to_string(root->shape));
  }
  if (!root->requires_grad) return;

  // Iterative post-order DFS.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.get(), 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* node : order) {
    if (!node->leaf) std::fill(node->grad.begin(), node->grad.end(), 0.0);
  }
  root->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (!(*it)->leaf && (*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

double grad_check(const std::function<Tensor()>& f, std::span<Parameter> params, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("grad_check: step h must be > 0");
  for (auto& p : params) p.tensor.zero_grad();
  const Tensor loss = f();
  if (!std::isfinite(loss.item())) throw std::domain_error("grad_check: non-finite f value");
  backward(loss);

  NoGradGuard no_grad;
  double worst = 0.0;
  for (auto& p : params) {
    const std::vector<double> analytic(p.tensor.grad().begin(), p.tensor.grad().end());
    auto values = p.tensor.mutable_values();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double original = values[k];
      values[k] = original + h;
      const double up = f().item();
      values[k] = original - h;
      const double down = f().item();
      values[k] = original;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw std::domain_error("grad_check: non-finite f value while perturbing " + p.name);
      }
      const double numeric = (up - down) / (2.0 * h);
      worst = std::max(worst, std::abs(analytic[k] - numeric) / std::max(1.0, std::abs(analytic[k])));
    }
  }
  return worst;
}

}  // namespace privae::ad
