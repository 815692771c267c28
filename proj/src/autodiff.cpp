#include "msa/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "msa/kernels.hpp"

namespace msa::autodiff {

namespace {
const kernels::Ops& K() { return kernels::ops(); }

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

// ---------------------------------------------------------------------------
// Tensor accessors

const Shape& Tensor::shape() const { return tape_->node(id_).shape; }

std::size_t Tensor::size() const { return numel(shape()); }

std::span<const double> Tensor::value() const {
  const auto& n = tape_->node(id_);
  return {n.value, numel(n.shape)};
}

double Tensor::scalar_value() const {
  if (size() != 1)
    throw ContractError("scalar_value on non-scalar tensor " + shape_str(shape()));
  return value()[0];
}

bool Tensor::requires_grad() const { return tape_->node(id_).requires_grad; }

// ---------------------------------------------------------------------------
// Leaves

Tensor Tape::emplace(Node&& n) {
  if (!n.owned.empty()) n.value = n.owned.data();
  nodes_.push_back(std::move(n));
  return Tensor(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Tensor Tape::constant(Shape shape, std::vector<double> values) {
  if (numel(shape) != values.size())
    throw ShapeError("constant: shape " + shape_str(shape) + " does not hold " +
                     std::to_string(values.size()) + " values");
  Node n;
  n.kind = OpKind::Constant;
  n.shape = std::move(shape);
  n.owned = std::move(values);
  return emplace(std::move(n));
}

Tensor Tape::scalar(double value) { return constant({1}, {value}); }

Tensor Tape::input(Shape shape, const double* data) {
  Node n;
  n.kind = OpKind::Input;
  n.shape = std::move(shape);
  n.value = data;
  return emplace(std::move(n));
}

Tensor Tape::parameter(Shape shape, const double* value, double* grad) {
  Node n;
  n.kind = OpKind::Parameter;
  n.requires_grad = true;
  n.shape = std::move(shape);
  n.value = value;
  n.ext_grad = grad;
  return emplace(std::move(n));
}

// ---------------------------------------------------------------------------
// Operations

namespace {
bool any_grad(const std::initializer_list<Tensor>& ts) {
  for (const auto& t : ts)
    if (t.requires_grad()) return true;
  return false;
}
}  // namespace

Tensor Tape::matmul(Tensor a, Tensor b) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0])
    throw ShapeError("matmul: incompatible shapes " + shape_str(sa) + " and " +
                     shape_str(sb));
  Node n;
  n.kind = OpKind::MatMul;
  n.requires_grad = any_grad({a, b});
  n.shape = {sa[0], sb[1]};
  n.owned.resize(sa[0] * sb[1]);
  K().gemm_nn(sa[0], sa[1], sb[1], a.value().data(), b.value().data(),
              n.owned.data());
  n.inputs = {a.id(), b.id()};
  return emplace(std::move(n));
}

Tensor Tape::vecmat(Tensor x, Tensor w) {
  const auto& sx = x.shape();
  const auto& sw = w.shape();
  if (sx.size() != 1 || sw.size() != 2 || sx[0] != sw[0])
    throw ShapeError("vecmat: incompatible shapes " + shape_str(sx) + " and " +
                     shape_str(sw));
  Node n;
  n.kind = OpKind::VecMat;
  n.requires_grad = any_grad({x, w});
  n.shape = {sw[1]};
  n.owned.resize(sw[1]);
  K().gemm_nn(1, sw[0], sw[1], x.value().data(), w.value().data(),
              n.owned.data());
  n.inputs = {x.id(), w.id()};
  return emplace(std::move(n));
}

namespace {
void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}
}  // namespace

Tensor Tape::add(Tensor a, Tensor b) {
  require_same_shape("add", a, b);
  Node n;
  n.kind = OpKind::Add;
  n.requires_grad = any_grad({a, b});
  n.shape = a.shape();
  n.owned.resize(a.size());
  K().add(a.size(), a.value().data(), b.value().data(), n.owned.data());
  n.inputs = {a.id(), b.id()};
  return emplace(std::move(n));
}

Tensor Tape::sub(Tensor a, Tensor b) {
  require_same_shape("sub", a, b);
  Node n;
  n.kind = OpKind::Sub;
  n.requires_grad = any_grad({a, b});
  n.shape = a.shape();
  n.owned.resize(a.size());
  K().sub(a.size(), a.value().data(), b.value().data(), n.owned.data());
  n.inputs = {a.id(), b.id()};
  return emplace(std::move(n));
}

Tensor Tape::mul(Tensor a, Tensor b) {
  require_same_shape("mul", a, b);
  Node n;
  n.kind = OpKind::Mul;
  n.requires_grad = any_grad({a, b});
  n.shape = a.shape();
  n.owned.resize(a.size());
  K().mul(a.size(), a.value().data(), b.value().data(), n.owned.data());
  n.inputs = {a.id(), b.id()};
  return emplace(std::move(n));
}

Tensor Tape::scale(Tensor x, double alpha) {
  Node n;
  n.kind = OpKind::Scale;
  n.requires_grad = x.requires_grad();
  n.shape = x.shape();
  n.owned.resize(x.size());
  K().scale(x.size(), alpha, x.value().data(), n.owned.data());
  n.inputs = {x.id()};
  n.c0 = alpha;
  return emplace(std::move(n));
}

Tensor Tape::unary_elementwise(OpKind kind, Tensor x) {
  Node n;
  n.kind = kind;
  n.requires_grad = x.requires_grad();
  n.shape = x.shape();
  n.owned.resize(x.size());
  const auto xs = x.value();
  switch (kind) {
    case OpKind::Tanh:
      for (std::size_t i = 0; i < xs.size(); ++i) n.owned[i] = std::tanh(xs[i]);
      break;
    case OpKind::Sigmoid:
      for (std::size_t i = 0; i < xs.size(); ++i)
        n.owned[i] = stable_sigmoid(xs[i]);
      break;
    case OpKind::Relu:
      K().relu(xs.size(), xs.data(), n.owned.data());
      break;
    case OpKind::Abs:
      K().abs_fwd(xs.size(), xs.data(), n.owned.data());
      break;
    case OpKind::Log:
      for (std::size_t i = 0; i < xs.size(); ++i) n.owned[i] = std::log(xs[i]);
      break;
    default:
      throw ContractError("unary_elementwise: bad op");
  }
  n.inputs = {x.id()};
  return emplace(std::move(n));
}

Tensor Tape::tanh(Tensor x) { return unary_elementwise(OpKind::Tanh, x); }
Tensor Tape::sigmoid(Tensor x) { return unary_elementwise(OpKind::Sigmoid, x); }
Tensor Tape::relu(Tensor x) { return unary_elementwise(OpKind::Relu, x); }
Tensor Tape::abs(Tensor x) { return unary_elementwise(OpKind::Abs, x); }
Tensor Tape::log(Tensor x) { return unary_elementwise(OpKind::Log, x); }

Tensor Tape::clamp(Tensor x, double lo, double hi) {
  Node n;
  n.kind = OpKind::Clamp;
  n.requires_grad = x.requires_grad();
  n.shape = x.shape();
  n.owned.resize(x.size());
  const auto xs = x.value();
  for (std::size_t i = 0; i < xs.size(); ++i)
    n.owned[i] = std::min(hi, std::max(lo, xs[i]));
  n.inputs = {x.id()};
  n.c0 = lo;
  n.c1 = hi;
  return emplace(std::move(n));
}

Tensor Tape::softmax(Tensor x) {
  if (x.shape().size() != 1 || x.size() == 0)
    throw ShapeError("softmax: expects a non-empty vector, got " +
                     shape_str(x.shape()));
  Node n;
  n.kind = OpKind::Softmax;
  n.requires_grad = x.requires_grad();
  n.shape = x.shape();
  n.owned.resize(x.size());
  const auto xs = x.value();
  const double mx = *std::max_element(xs.begin(), xs.end());
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    n.owned[i] = std::exp(xs[i] - mx);
    total += n.owned[i];
  }
  for (double& v : n.owned) v /= total;
  n.inputs = {x.id()};
  return emplace(std::move(n));
}

Tensor Tape::sum(Tensor x) {
  Node n;
  n.kind = OpKind::Sum;
  n.requires_grad = x.requires_grad();
  n.shape = {1};
  n.owned = {K().sum(x.size(), x.value().data())};
  n.inputs = {x.id()};
  return emplace(std::move(n));
}

Tensor Tape::mean(Tensor x) {
  if (x.size() == 0) throw ContractError("mean of empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Tensor Tape::sumsq(Tensor x) {
  Node n;
  n.kind = OpKind::SumSq;
  n.requires_grad = x.requires_grad();
  n.shape = {1};
  n.owned = {K().sumsq(x.size(), x.value().data())};
  n.inputs = {x.id()};
  return emplace(std::move(n));
}

Tensor Tape::dot(Tensor a, Tensor b) {
  require_same_shape("dot", a, b);
  if (a.shape().size() != 1)
    throw ShapeError("dot: expects vectors, got " + shape_str(a.shape()));
  Node n;
  n.kind = OpKind::Dot;
  n.requires_grad = any_grad({a, b});
  n.shape = {1};
  n.owned = {K().dot(a.size(), a.value().data(), b.value().data())};
  n.inputs = {a.id(), b.id()};
  return emplace(std::move(n));
}

Tensor Tape::concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractError("concat of zero tensors");
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.shape().size() != 1)
      throw ShapeError("concat: expects vectors, got " + shape_str(p.shape()));
    total += p.size();
  }
  Node n;
  n.kind = OpKind::Concat;
  n.shape = {total};
  n.owned.resize(total);
  std::size_t off = 0;
  for (const auto& p : parts) {
    n.requires_grad = n.requires_grad || p.requires_grad();
    std::memcpy(n.owned.data() + off, p.value().data(),
                p.size() * sizeof(double));
    off += p.size();
    n.inputs.push_back(p.id());
  }
  return emplace(std::move(n));
}

Tensor Tape::outer3(Tensor a, Tensor b, Tensor c) {
  if (a.shape().size() != 1 || b.shape().size() != 1 || c.shape().size() != 1)
    throw ShapeError("outer3: expects vectors, got " + shape_str(a.shape()) +
                     ", " + shape_str(b.shape()) + ", " + shape_str(c.shape()));
  Node n;
  n.kind = OpKind::Outer3;
  n.requires_grad = any_grad({a, b, c});
  n.shape = {a.size() * b.size() * c.size()};
  n.owned.resize(numel(n.shape));
  K().outer3(a.size(), b.size(), c.size(), a.value().data(), b.value().data(),
             c.value().data(), n.owned.data());
  n.inputs = {a.id(), b.id(), c.id()};
  return emplace(std::move(n));
}

Tensor Tape::add_n(std::span<const Tensor> terms) {
  if (terms.empty()) throw ContractError("add_n of zero tensors");
  for (std::size_t i = 1; i < terms.size(); ++i)
    require_same_shape("add_n", terms[0], terms[i]);
  Node n;
  n.kind = OpKind::AddN;
  n.shape = terms[0].shape();
  n.owned.assign(terms[0].size(), 0.0);
  for (const auto& t : terms) {
    n.requires_grad = n.requires_grad || t.requires_grad();
    K().acc(t.size(), t.value().data(), n.owned.data());
    n.inputs.push_back(t.id());
  }
  return emplace(std::move(n));
}

// ---------------------------------------------------------------------------
// Backward

double* Tape::grad_buf(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.ext_grad) return n.ext_grad;
  if (grads_[id].empty()) grads_[id].assign(numel(n.shape), 0.0);
  return grads_[id].data();
}

void Tape::backward(const Tensor& loss) {
  if (!loss.valid() || loss.tape_ != this)
    throw ContractError("backward: loss not on this tape");
  if (loss.size() != 1)
    throw ContractError("backward: loss must be scalar, got " +
                        shape_str(loss.shape()));

  // Zero every registered parameter gradient so unreachable parameters end
  // exactly zero. A parameter re-registered on the tape shares its external
  // buffer; double zeroing before accumulation is harmless.
  for (Node& n : nodes_) {
    if (n.ext_grad) std::memset(n.ext_grad, 0, numel(n.shape) * sizeof(double));
  }
  grads_.assign(nodes_.size(), {});
  grad_buf(loss.id())[0] = 1.0;

  const auto& k = K();
  for (std::uint32_t id = loss.id() + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    if (!n.requires_grad || n.inputs.empty()) continue;
    if (!n.ext_grad && grads_[id].empty()) continue;  // not on loss ancestry
    const double* g = n.ext_grad ? n.ext_grad : grads_[id].data();
    const std::size_t sz = numel(n.shape);

    auto in = [&](std::size_t i) -> const Node& { return nodes_[n.inputs[i]]; };
    auto gin = [&](std::size_t i) { return grad_buf(n.inputs[i]); };

    switch (n.kind) {
      case OpKind::MatMul: {
        const Node& a = in(0);
        const Node& b = in(1);
        const std::size_t m = a.shape[0], kk = a.shape[1], nn = b.shape[1];
        if (a.requires_grad) k.matmul_acc_abt(m, nn, kk, g, b.value, gin(0));
        if (b.requires_grad) k.matmul_acc_atb(m, kk, nn, a.value, g, gin(1));
        break;
      }
      case OpKind::VecMat: {
        const Node& x = in(0);
        const Node& w = in(1);
        const std::size_t kk = w.shape[0], nn = w.shape[1];
        if (x.requires_grad) k.matmul_acc_abt(1, nn, kk, g, w.value, gin(0));
        if (w.requires_grad) k.matmul_acc_atb(1, kk, nn, x.value, g, gin(1));
        break;
      }
      case OpKind::Add:
        if (in(0).requires_grad) k.acc(sz, g, gin(0));
        if (in(1).requires_grad) k.acc(sz, g, gin(1));
        break;
      case OpKind::Sub:
        if (in(0).requires_grad) k.acc(sz, g, gin(0));
        if (in(1).requires_grad) k.axpy_acc(sz, -1.0, g, gin(1));
        break;
      case OpKind::Mul:
        if (in(0).requires_grad) k.mul_acc(sz, g, in(1).value, gin(0));
        if (in(1).requires_grad) k.mul_acc(sz, g, in(0).value, gin(1));
        break;
      case OpKind::Scale:
        if (in(0).requires_grad) k.axpy_acc(sz, n.c0, g, gin(0));
        break;
      case OpKind::Tanh:
        if (in(0).requires_grad) k.tanh_bwd_acc(sz, n.value, g, gin(0));
        break;
      case OpKind::Sigmoid:
        if (in(0).requires_grad) k.sigmoid_bwd_acc(sz, n.value, g, gin(0));
        break;
      case OpKind::Relu:
        if (in(0).requires_grad) k.relu_bwd_acc(sz, in(0).value, g, gin(0));
        break;
      case OpKind::Abs:
        if (in(0).requires_grad) k.abs_bwd_acc(sz, in(0).value, g, gin(0));
        break;
      case OpKind::Log:
        if (in(0).requires_grad) {
          double* dx = gin(0);
          const double* x = in(0).value;
          for (std::size_t i = 0; i < sz; ++i) dx[i] += g[i] / x[i];
        }
        break;
      case OpKind::Clamp:
        if (in(0).requires_grad) {
          double* dx = gin(0);
          const double* x = in(0).value;
          for (std::size_t i = 0; i < sz; ++i) {
            if (x[i] > n.c0 && x[i] < n.c1) dx[i] += g[i];
          }
        }
        break;
      case OpKind::Softmax:
        if (in(0).requires_grad) {
          const double s = k.dot(sz, g, n.value);
          double* dx = gin(0);
          for (std::size_t i = 0; i < sz; ++i)
            dx[i] += n.value[i] * (g[i] - s);
        }
        break;
      case OpKind::Sum:
        if (in(0).requires_grad)
          k.add_scalar_acc(numel(in(0).shape), g[0], gin(0));
        break;
      case OpKind::SumSq:
        if (in(0).requires_grad)
          k.axpy_acc(numel(in(0).shape), 2.0 * g[0], in(0).value, gin(0));
        break;
      case OpKind::Dot:
        if (in(0).requires_grad) k.axpy_acc(numel(in(0).shape), g[0], in(1).value, gin(0));
        if (in(1).requires_grad) k.axpy_acc(numel(in(1).shape), g[0], in(0).value, gin(1));
        break;
      case OpKind::Concat: {
        std::size_t off = 0;
        for (std::size_t i = 0; i < n.inputs.size(); ++i) {
          const std::size_t len = numel(in(i).shape);
          if (in(i).requires_grad) k.acc(len, g + off, gin(i));
          off += len;
        }
        break;
      }
      case OpKind::Outer3: {
        const Node& a = in(0);
        const Node& b = in(1);
        const Node& c = in(2);
        const std::size_t na = numel(a.shape), nb = numel(b.shape),
                          nc = numel(c.shape);
        double* da = a.requires_grad ? gin(0) : nullptr;
        double* db = b.requires_grad ? gin(1) : nullptr;
        double* dc = c.requires_grad ? gin(2) : nullptr;
        for (std::size_t i = 0; i < na; ++i) {
          double da_i = 0.0;
          for (std::size_t j = 0; j < nb; ++j) {
            const double* gij = g + (i * nb + j) * nc;
            if (da || db) {
              const double d = k.dot(nc, gij, c.value);
              da_i += b.value[j] * d;
              if (db) db[j] += a.value[i] * d;
            }
            if (dc) k.axpy_acc(nc, a.value[i] * b.value[j], gij, dc);
          }
          if (da) da[i] += da_i;
        }
        break;
      }
      case OpKind::AddN:
        for (std::size_t i = 0; i < n.inputs.size(); ++i) {
          if (in(i).requires_grad) k.acc(sz, g, gin(i));
        }
        break;
      case OpKind::Constant:
      case OpKind::Input:
      case OpKind::Parameter:
        break;
    }
  }
}

std::vector<double> Tape::grad_of(const Tensor& t) const {
  const Node& n = nodes_[t.id()];
  const std::size_t sz = numel(n.shape);
  if (n.ext_grad) return std::vector<double>(n.ext_grad, n.ext_grad + sz);
  if (t.id() < grads_.size() && !grads_[t.id()].empty()) return grads_[t.id()];
  return std::vector<double>(sz, 0.0);
}

// ---------------------------------------------------------------------------

double finite_difference_check(std::span<double> params,
                               const std::function<double()>& forward,
                               std::span<const double> analytic_grad,
                               double eps) {
  if (eps <= 0.0) throw ContractError("finite_difference_check: eps must be > 0");
  if (params.size() != analytic_grad.size())
    throw ContractError("finite_difference_check: gradient length mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + eps;
    const double up = forward();
    params[i] = saved - eps;
    const double down = forward();
    params[i] = saved;
    const double cd = (up - down) / (2.0 * eps);
    const double err =
        std::fabs(analytic_grad[i] - cd) / std::max(1.0, std::fabs(cd));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace msa::autodiff
