#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "msa/error.hpp"

namespace msa::autodiff {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tape;

// Lightweight handle to a node on a tape. Valid while the tape is alive and
// not reset. Copying a Tensor copies the handle, not the data.
class Tensor {
 public:
  Tensor() = default;

  const Shape& shape() const;
  std::size_t size() const;
  std::span<const double> value() const;
  double scalar_value() const;
  bool requires_grad() const;

  bool valid() const { return tape_ != nullptr; }
  std::uint32_t id() const { return id_; }

 private:
  friend class Tape;
  Tensor(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

// Define-by-run tape: every operation records a node eagerly (forward values
// are computed at creation), and node creation order is a topological order,
// so backward is a single reverse sweep. A tape and its tensors are confined
// to one thread; a fresh tape is built per forward pass.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // -- leaves ---------------------------------------------------------------
  Tensor constant(Shape shape, std::vector<double> values);
  Tensor scalar(double value);
  /// Constant leaf referencing external storage (no copy, no gradient).
  /// The pointed-to data must outlive the tape.
  Tensor input(Shape shape, const double* data);
  /// Trainable leaf referencing external value and gradient storage.
  /// backward() zeroes `grad` and accumulates into it.
  Tensor parameter(Shape shape, const double* value, double* grad);

  // -- operations -----------------------------------------------------------
  Tensor matmul(Tensor a, Tensor b);  // [m×k]·[k×n] -> [m×n]
  Tensor vecmat(Tensor x, Tensor w);  // [k]·[k×n] -> [n]
  Tensor add(Tensor a, Tensor b);
  Tensor sub(Tensor a, Tensor b);
  Tensor mul(Tensor a, Tensor b);
  Tensor scale(Tensor x, double alpha);
  Tensor tanh(Tensor x);
  Tensor sigmoid(Tensor x);
  Tensor relu(Tensor x);
  Tensor abs(Tensor x);
  /// Elementwise natural log; inputs must already be positive (clamp first).
  Tensor log(Tensor x);
  /// Elementwise clamp to [lo, hi]; gradient passes only strictly inside.
  Tensor clamp(Tensor x, double lo, double hi);
  /// Stable softmax over a vector (max subtraction).
  Tensor softmax(Tensor x);
  Tensor sum(Tensor x);    // -> scalar
  Tensor mean(Tensor x);   // -> scalar
  Tensor sumsq(Tensor x);  // -> scalar
  Tensor dot(Tensor a, Tensor b);
  Tensor concat(std::span<const Tensor> parts);  // rank-1 parts
  /// Flattened three-way outer product, index order ((i*nb)+j)*nc + k.
  Tensor outer3(Tensor a, Tensor b, Tensor c);
  /// Sum of same-shaped tensors.
  Tensor add_n(std::span<const Tensor> terms);

  // -- backward -------------------------------------------------------------
  /// Reverse accumulation from a scalar loss. Zeroes every registered
  /// parameter gradient first, so unreachable parameters end exactly zero.
  void backward(const Tensor& loss);

  /// Gradient of a tensor from the last backward(); zeros if unreachable.
  std::vector<double> grad_of(const Tensor& t) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  friend class Tensor;

  enum class OpKind : std::uint8_t {
    Constant, Input, Parameter,
    MatMul, VecMat, Add, Sub, Mul, Scale,
    Tanh, Sigmoid, Relu, Abs, Log, Clamp, Softmax,
    Sum, SumSq, Dot, Concat, Outer3, AddN,
  };

  struct Node {
    OpKind kind;
    bool requires_grad = false;
    Shape shape;
    std::vector<double> owned;      // forward value when owned
    const double* value = nullptr;  // owned.data() or external
    double* ext_grad = nullptr;     // Parameter leaves only
    std::vector<std::uint32_t> inputs;
    double c0 = 0.0, c1 = 0.0;      // scale factor / clamp bounds
  };

  const Node& node(std::uint32_t id) const { return nodes_[id]; }
  Tensor emplace(Node&& n);
  Tensor unary_elementwise(OpKind kind, Tensor x);
  double* grad_buf(std::uint32_t id);
  void accumulate_into(const Node& out, std::span<const double> g);

  std::vector<Node> nodes_;
  std::vector<std::vector<double>> grads_;
};

/// Max over parameters of |analytic - central difference| / max(1, |cd|).
/// Perturbs `params` in place (restoring them); `forward` must re-evaluate
/// the scalar function with the current parameter values.
double finite_difference_check(std::span<double> params,
                               const std::function<double()>& forward,
                               std::span<const double> analytic_grad,
                               double eps);

}  // namespace msa::autodiff
