#pragma once

#include <functional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "msa/autodiff.hpp"
#include "msa/rng.hpp"

namespace msa::layers {

// A named trainable array with persistent value and gradient storage.
// Layers re-register parameters on each forward tape; backward accumulates
// into `grad`. Value snapshots are plain vectors and freely transferable.
struct Parameter {
  std::string name;
  autodiff::Shape shape;
  std::vector<double> value;
  std::vector<double> grad;

  Parameter(std::string name_, autodiff::Shape shape_)
      : name(std::move(name_)),
        shape(std::move(shape_)),
        value(autodiff::numel(shape), 0.0),
        grad(autodiff::numel(shape), 0.0) {}

  std::size_t size() const { return value.size(); }
  autodiff::Tensor leaf(autodiff::Tape& tape) {
    return tape.parameter(shape, value.data(), grad.data());
  }
};

using ParamVisitor = std::function<void(Parameter&)>;

enum class Activation { Relu, Tanh, Sigmoid, Softmax, Linear };

/// Glorot-uniform fill: U(-b, b) with b = sqrt(6 / (fan_in + fan_out)).
void glorot_init(Rng& rng, Parameter& p, std::size_t fan_in,
                 std::size_t fan_out);
double glorot_bound(std::size_t fan_in, std::size_t fan_out);

// Collects L2 penalty terms during a forward pass. A layer's penalty depends
// only on its weights, so it is recorded once per collector (i.e. once per
// batch tape) no matter how many samples run through the layer.
class L2Collector {
 public:
  explicit L2Collector(autodiff::Tape& tape) : tape_(&tape) {}

  /// True the first time `layer` is seen by this collector.
  bool first_visit(const void* layer) { return seen_.insert(layer).second; }
  void add_term(autodiff::Tensor term) { terms_.push_back(term); }

  /// Scalar sum of all recorded penalties (exact zero scalar when none).
  autodiff::Tensor total();

 private:
  autodiff::Tape* tape_;
  std::unordered_set<const void*> seen_;
  std::vector<autodiff::Tensor> terms_;
};

// Fully connected layer over vectors: activation(x·W + b).
class DenseLayer {
 public:
  DenseLayer(const std::string& name, std::size_t in, std::size_t out,
             Activation act, double l2_weight = 0.0);

  void init(Rng& rng);

  /// When `l2` is given and l2_weight > 0, records l2_weight * sum(W^2)
  /// for the training loss.
  autodiff::Tensor forward(autodiff::Tape& tape, autodiff::Tensor x,
                           L2Collector* l2 = nullptr);

  std::size_t in_size() const { return weight.shape[0]; }
  std::size_t out_size() const { return weight.shape[1]; }
  double l2_weight() const { return l2_weight_; }
  void visit(const ParamVisitor& v);

  Parameter weight;  // [in×out]
  Parameter bias;    // [out]

 private:
  Activation act_;
  double l2_weight_;
};

// Single-layer LSTM; processes a sequence of input vectors and returns the
// final hidden state. Gate order is fixed as (input, forget, cell, output);
// the forget-gate bias initializes to 1.0, all other biases to zero. Hidden
// and cell states start at zero for every sequence. Sequences are processed
// at their true length; nothing is ever padded.
class LstmLayer {
 public:
  LstmLayer(const std::string& name, std::size_t in, std::size_t hidden);

  void init(Rng& rng);

  autodiff::Tensor forward(autodiff::Tape& tape,
                           std::span<const autodiff::Tensor> steps);

  std::size_t in_size() const { return in_; }
  std::size_t hidden_size() const { return hidden_; }
  void visit(const ParamVisitor& v);

  // indexed by gate: 0=input, 1=forget, 2=cell, 3=output
  std::vector<Parameter> w;  // 4 × [in×hidden]
  std::vector<Parameter> u;  // 4 × [hidden×hidden]
  std::vector<Parameter> b;  // 4 × [hidden]

 private:
  std::size_t in_, hidden_;
};

struct DropoutSpec {
  double rate = 0.0;  // in [0, 1)
};

/// Inverted dropout: in training, keeps each unit with probability 1-rate and
/// scales survivors by 1/(1-rate); in evaluation, returns x unchanged.
autodiff::Tensor dropout_forward(autodiff::Tape& tape, const DropoutSpec& spec,
                                 autodiff::Tensor x, bool training, Rng& rng);

}  // namespace msa::layers
