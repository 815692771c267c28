#include "msa/layers.hpp"

#include <cmath>

namespace msa::layers {

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void glorot_init(Rng& rng, Parameter& p, std::size_t fan_in,
                 std::size_t fan_out) {
  const double b = glorot_bound(fan_in, fan_out);
  for (double& v : p.value) v = rng.uniform(-b, b);
}

autodiff::Tensor L2Collector::total() {
  if (terms_.empty()) return tape_->scalar(0.0);
  return tape_->add_n(terms_);
}

// ---------------------------------------------------------------------------

DenseLayer::DenseLayer(const std::string& name, std::size_t in, std::size_t out,
                       Activation act, double l2_weight)
    : weight(name + ".weight", {in, out}),
      bias(name + ".bias", {out}),
      act_(act),
      l2_weight_(l2_weight) {}

void DenseLayer::init(Rng& rng) {
  glorot_init(rng, weight, in_size(), out_size());
  // biases stay zero
}

autodiff::Tensor DenseLayer::forward(autodiff::Tape& tape, autodiff::Tensor x,
                                     L2Collector* l2) {
  if (x.shape().size() != 1 || x.size() != in_size())
    throw ShapeError("dense " + weight.name + ": input " +
                     autodiff::shape_str(x.shape()) + " does not match [" +
                     std::to_string(in_size()) + "]");
  auto w = weight.leaf(tape);
  auto pre = tape.add(tape.vecmat(x, w), bias.leaf(tape));
  if (l2 && l2_weight_ > 0.0 && l2->first_visit(this))
    l2->add_term(tape.scale(tape.sumsq(w), l2_weight_));
  switch (act_) {
    case Activation::Relu:
      return tape.relu(pre);
    case Activation::Tanh:
      return tape.tanh(pre);
    case Activation::Sigmoid:
      return tape.sigmoid(pre);
    case Activation::Softmax:
      return tape.softmax(pre);
    case Activation::Linear:
      return pre;
  }
  throw ContractError("dense: unknown activation");
}

void DenseLayer::visit(const ParamVisitor& v) {
  v(weight);
  v(bias);
}

// ---------------------------------------------------------------------------

namespace {
constexpr const char* kGateNames[4] = {"i", "f", "g", "o"};
constexpr std::size_t kForgetGate = 1;
}  // namespace

LstmLayer::LstmLayer(const std::string& name, std::size_t in,
                     std::size_t hidden)
    : in_(in), hidden_(hidden) {
  for (int gate = 0; gate < 4; ++gate) {
    const std::string suffix = kGateNames[gate];
    w.emplace_back(name + ".w_" + suffix, autodiff::Shape{in, hidden});
    u.emplace_back(name + ".u_" + suffix, autodiff::Shape{hidden, hidden});
    b.emplace_back(name + ".b_" + suffix, autodiff::Shape{hidden});
  }
}

void LstmLayer::init(Rng& rng) {
  for (int gate = 0; gate < 4; ++gate) {
    glorot_init(rng, w[gate], in_, hidden_);
    glorot_init(rng, u[gate], hidden_, hidden_);
  }
  for (double& v : b[kForgetGate].value) v = 1.0;
}

autodiff::Tensor LstmLayer::forward(autodiff::Tape& tape,
                                    std::span<const autodiff::Tensor> steps) {
  if (steps.empty())
    throw ContractError("lstm " + w[0].name + ": empty sequence");

  autodiff::Tensor wl[4], ul[4], bl[4];
  for (int gate = 0; gate < 4; ++gate) {
    wl[gate] = w[gate].leaf(tape);
    ul[gate] = u[gate].leaf(tape);
    bl[gate] = b[gate].leaf(tape);
  }

  auto h = tape.constant({hidden_}, std::vector<double>(hidden_, 0.0));
  auto c = tape.constant({hidden_}, std::vector<double>(hidden_, 0.0));

  for (const auto& x : steps) {
    if (x.shape().size() != 1 || x.size() != in_)
      throw ShapeError("lstm " + w[0].name + ": step " +
                       autodiff::shape_str(x.shape()) + " does not match [" +
                       std::to_string(in_) + "]");
    auto gate_pre = [&](int gate) {
      return tape.add(tape.add(tape.vecmat(x, wl[gate]), tape.vecmat(h, ul[gate])),
                      bl[gate]);
    };
    auto i = tape.sigmoid(gate_pre(0));
    auto f = tape.sigmoid(gate_pre(1));
    auto g = tape.tanh(gate_pre(2));
    auto o = tape.sigmoid(gate_pre(3));
    c = tape.add(tape.mul(f, c), tape.mul(i, g));
    h = tape.mul(o, tape.tanh(c));
  }
  return h;
}

void LstmLayer::visit(const ParamVisitor& v) {
  for (int gate = 0; gate < 4; ++gate) {
    v(w[gate]);
    v(u[gate]);
    v(b[gate]);
  }
}

// ---------------------------------------------------------------------------

autodiff::Tensor dropout_forward(autodiff::Tape& tape, const DropoutSpec& spec,
                                 autodiff::Tensor x, bool training, Rng& rng) {
  if (spec.rate < 0.0 || spec.rate >= 1.0)
    throw ContractError("dropout: rate must be in [0, 1), got " +
                        std::to_string(spec.rate));
  if (!training || spec.rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - spec.rate);
  std::vector<double> mask(x.size());
  for (double& m : mask) m = rng.uniform() < spec.rate ? 0.0 : keep_scale;
  return tape.mul(x, tape.constant(x.shape(), std::move(mask)));
}

}  // namespace msa::layers
