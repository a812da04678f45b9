#include "gsgan/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace gsgan {

namespace detail {

struct TensorNode {
  Shape shape;
  std::vector<double> data;
  bool requires_grad = false;
  std::vector<double> grad;  // empty until first written
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void()> backprop;

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
  bool is_leaf() const { return !static_cast<bool>(backprop); }
};

}  // namespace detail

using detail::TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

namespace {

thread_local bool g_grad_enabled = true;

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

void validate_shape(const Shape& shape) {
  if (shape.empty()) throw std::invalid_argument("tensor shape must have rank >= 1");
  for (std::size_t d : shape) {
    if (d == 0) throw std::invalid_argument("tensor shape extents must be positive, got " + shape_str(shape));
  }
}

void check_finite(const char* op, const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::runtime_error(std::string("tensor op '") + op + "' produced a non-finite value");
    }
  }
}

NodePtr require_node(const char* op, const Tensor& t) {
  if (!t.defined()) throw std::invalid_argument(std::string(op) + ": undefined tensor operand");
  return t.node();
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
  }
}

void require_single(const char* op, const Tensor& t) {
  if (t.size() != 1) {
    throw std::invalid_argument(std::string(op) + ": expected a single-element tensor, got " +
                                shape_str(t.shape()));
  }
}

// Finishes an op: finite-check, and wire the graph when grad is live.
Tensor finish(const char* op, NodePtr out, std::vector<NodePtr> parents,
              std::function<void()> backprop) {
  check_finite(op, out->data);
  bool track = false;
  if (g_grad_enabled) {
    for (const auto& p : parents) {
      if (p->requires_grad) {
        track = true;
        break;
      }
    }
  }
  if (track) {
    out->requires_grad = true;
    out->parents = std::move(parents);
    out->backprop = std::move(backprop);
  }
  return Tensor(std::move(out));
}

NodePtr new_node(Shape shape, std::vector<double> data) {
  auto n = std::make_shared<TensorNode>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  return n;
}

void accumulate(TensorNode* n, const std::vector<double>& g) {
  if (!n->requires_grad) return;
  n->ensure_grad();
  for (std::size_t i = 0; i < g.size(); ++i) n->grad[i] += g[i];
}

}  // namespace

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

bool grad_enabled() { return g_grad_enabled; }

// ---- Tensor ----

Tensor::Tensor() = default;
Tensor::~Tensor() = default;
Tensor::Tensor(const Tensor&) = default;
Tensor::Tensor(Tensor&&) noexcept = default;
Tensor& Tensor::operator=(const Tensor&) = default;
Tensor& Tensor::operator=(Tensor&&) noexcept = default;
Tensor::Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
  return full(shape, 0.0, requires_grad);
}

Tensor Tensor::full(const Shape& shape, double value, bool requires_grad) {
  validate_shape(shape);
  auto n = new_node(shape, std::vector<double>(shape_numel(shape), value));
  n->requires_grad = requires_grad;
  check_finite("full", n->data);
  return Tensor(std::move(n));
}

Tensor Tensor::from_data(const Shape& shape, std::vector<double> data, bool requires_grad) {
  validate_shape(shape);
  if (shape_numel(shape) != data.size()) {
    throw std::invalid_argument("from_data: shape " + shape_str(shape) + " wants " +
                                std::to_string(shape_numel(shape)) + " values, got " +
                                std::to_string(data.size()));
  }
  auto n = new_node(shape, std::move(data));
  n->requires_grad = requires_grad;
  check_finite("from_data", n->data);
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return require_node("shape", *this)->shape; }
std::size_t Tensor::size() const { return require_node("size", *this)->data.size(); }
std::size_t Tensor::rank() const { return shape().size(); }

double Tensor::value() const {
  require_single("value", *this);
  return node_->data[0];
}

double Tensor::at(std::size_t flat) const {
  const auto& d = data();
  if (flat >= d.size()) throw std::out_of_range("Tensor::at: index out of range");
  return d[flat];
}

std::vector<double>& Tensor::data() { return require_node("data", *this)->data; }
const std::vector<double>& Tensor::data() const { return require_node("data", *this)->data; }

bool Tensor::requires_grad() const { return require_node("requires_grad", *this)->requires_grad; }

Tensor& Tensor::set_requires_grad(bool v) {
  require_node("set_requires_grad", *this)->requires_grad = v;
  return *this;
}

const std::vector<double>& Tensor::grad() const {
  auto n = require_node("grad", *this);
  n->ensure_grad();
  return n->grad;
}

void Tensor::zero_grad() {
  auto n = require_node("zero_grad", *this);
  n->grad.assign(n->data.size(), 0.0);
}

Tensor Tensor::detach() const {
  auto n = require_node("detach", *this);
  auto out = new_node(n->shape, n->data);
  return Tensor(std::move(out));
}

void Tensor::backward() const {
  auto root = require_node("backward", *this);
  if (root->data.size() != 1) {
    throw std::invalid_argument("backward: loss must be a scalar, got shape " + shape_str(root->shape));
  }
  if (!root->requires_grad) return;

  // Post-order DFS over the reachable grad-requiring subgraph.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  struct Frame {
    TensorNode* n;
    std::size_t next = 0;
  };
  std::vector<Frame> stack;
  stack.push_back({root.get()});
  seen.insert(root.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < f.n->parents.size()) {
      TensorNode* p = f.n->parents[f.next++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.push_back({p});
      }
    } else {
      order.push_back(f.n);
      stack.pop_back();
    }
  }

  // Interior grads are scratch for this pass; leaf grads persist/accumulate.
  for (TensorNode* n : order) {
    if (!n->is_leaf()) n->grad.assign(n->data.size(), 0.0);
  }
  root->ensure_grad();
  root->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backprop) (*it)->backprop();
  }
}

// ---- elementwise ----

namespace {

template <typename Fwd, typename Bwd>
Tensor unary_pointwise(const char* op, const Tensor& a, Fwd fwd, Bwd dydx) {
  auto an = require_node(op, a);
  std::vector<double> out(an->data.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(an->data[i]);
  auto on = new_node(an->shape, std::move(out));
  TensorNode* ap = an.get();
  TensorNode* op_ = on.get();
  return finish(op, on, {an}, [ap, op_, dydx]() {
    if (!ap->requires_grad) return;
    ap->ensure_grad();
    for (std::size_t i = 0; i < op_->grad.size(); ++i) {
      ap->grad[i] += op_->grad[i] * dydx(ap->data[i], op_->data[i]);
    }
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  auto an = require_node("add", a);
  auto bn = require_node("add", b);
  require_same_shape("add", a, b);
  std::vector<double> out(an->data.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = an->data[i] + bn->data[i];
  auto on = new_node(an->shape, std::move(out));
  TensorNode *ap = an.get(), *bp = bn.get(), *op = on.get();
  return finish("add", on, {an, bn}, [ap, bp, op]() {
    accumulate(ap, op->grad);
    accumulate(bp, op->grad);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  auto an = require_node("sub", a);
  auto bn = require_node("sub", b);
  require_same_shape("sub", a, b);
  std::vector<double> out(an->data.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = an->data[i] - bn->data[i];
  auto on = new_node(an->shape, std::move(out));
  TensorNode *ap = an.get(), *bp = bn.get(), *op = on.get();
  return finish("sub", on, {an, bn}, [ap, bp, op]() {
    accumulate(ap, op->grad);
    if (bp->requires_grad) {
      bp->ensure_grad();
      for (std::size_t i = 0; i < op->grad.size(); ++i) bp->grad[i] -= op->grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  auto an = require_node("mul", a);
  auto bn = require_node("mul", b);
  require_same_shape("mul", a, b);
  std::vector<double> out(an->data.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = an->data[i] * bn->data[i];
  auto on = new_node(an->shape, std::move(out));
  TensorNode *ap = an.get(), *bp = bn.get(), *op = on.get();
  return finish("mul", on, {an, bn}, [ap, bp, op]() {
    if (ap->requires_grad) {
      ap->ensure_grad();
      for (std::size_t i = 0; i < op->grad.size(); ++i) ap->grad[i] += op->grad[i] * bp->data[i];
    }
    if (bp->requires_grad) {
      bp->ensure_grad();
      for (std::size_t i = 0; i < op->grad.size(); ++i) bp->grad[i] += op->grad[i] * ap->data[i];
    }
  });
}

Tensor div(const Tensor& a, const Tensor& b) {
  auto an = require_node("div", a);
  auto bn = require_node("div", b);
  require_same_shape("div", a, b);
  std::vector<double> out(an->data.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = an->data[i] / bn->data[i];
  auto on = new_node(an->shape, std::move(out));
  TensorNode *ap = an.get(), *bp = bn.get(), *op = on.get();
  return finish("div", on, {an, bn}, [ap, bp, op]() {
    if (ap->requires_grad) {
      ap->ensure_grad();
      for (std::size_t i = 0; i < op->grad.size(); ++i) ap->grad[i] += op->grad[i] / bp->data[i];
    }
    if (bp->requires_grad) {
      bp->ensure_grad();
      for (std::size_t i = 0; i < op->grad.size(); ++i) {
        bp->grad[i] -= op->grad[i] * op->data[i] / bp->data[i];
      }
    }
  });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor scale(const Tensor& a, double c) { return affine_const(a, c, 0.0); }

Tensor affine_const(const Tensor& a, double mul_c, double add_c) {
  auto an = require_node("affine_const", a);
  std::vector<double> out(an->data.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mul_c * an->data[i] + add_c;
  auto on = new_node(an->shape, std::move(out));
  TensorNode *ap = an.get(), *op = on.get();
  return finish("affine_const", on, {an}, [ap, op, mul_c]() {
    if (!ap->requires_grad) return;
    ap->ensure_grad();
    for (std::size_t i = 0; i < op->grad.size(); ++i) ap->grad[i] += mul_c * op->grad[i];
  });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("clamp: lo must be <= hi");
  return unary_pointwise(
      "clamp", a, [lo, hi](double x) { return std::min(std::max(x, lo), hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& a, double negative_slope) {
  return unary_pointwise(
      "leaky_relu", a,
      [negative_slope](double x) { return x > 0.0 ? x : negative_slope * x; },
      [negative_slope](double x, double) { return x > 0.0 ? 1.0 : negative_slope; });
}

Tensor sigmoid(const Tensor& a) {
  return unary_pointwise(
      "sigmoid", a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary_pointwise(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& a) {
  return unary_pointwise(
      "exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary_pointwise(
      "log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor sin(const Tensor& a) {
  return unary_pointwise(
      "sin", a, [](double x) { return std::sin(x); }, [](double x, double) { return std::cos(x); });
}

Tensor cos(const Tensor& a) {
  return unary_pointwise(
      "cos", a, [](double x) { return std::cos(x); },
      [](double x, double) { return -std::sin(x); });
}

Tensor acos(const Tensor& a) {
  return unary_pointwise(
      "acos", a, [](double x) { return std::acos(x); },
      [](double x, double) { return -1.0 / std::sqrt(1.0 - x * x); });
}

Tensor smooth_l1(const Tensor& a, const Tensor& b) {
  auto an = require_node("smooth_l1", a);
  auto bn = require_node("smooth_l1", b);
  require_same_shape("smooth_l1", a, b);
  std::vector<double> out(an->data.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double e = an->data[i] - bn->data[i];
    out[i] = std::abs(e) < 1.0 ? 0.5 * e * e : std::abs(e) - 0.5;
  }
  auto on = new_node(an->shape, std::move(out));
  TensorNode *ap = an.get(), *bp = bn.get(), *op = on.get();
  return finish("smooth_l1", on, {an, bn}, [ap, bp, op]() {
    for (std::size_t i = 0; i < op->grad.size(); ++i) {
      const double e = ap->data[i] - bp->data[i];
      const double de = std::abs(e) < 1.0 ? e : (e > 0.0 ? 1.0 : -1.0);
      const double g = op->grad[i] * de;
      if (ap->requires_grad) {
        ap->ensure_grad();
        ap->grad[i] += g;
      }
      if (bp->requires_grad) {
        bp->ensure_grad();
        bp->grad[i] -= g;
      }
    }
  });
}

// ---- scalar-tensor ----

Tensor scalar_mul(const Tensor& s, const Tensor& a) {
  auto sn = require_node("scalar_mul", s);
  auto an = require_node("scalar_mul", a);
  require_single("scalar_mul", s);
  const double sv = sn->data[0];
  std::vector<double> out(an->data.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sv * an->data[i];
  auto on = new_node(an->shape, std::move(out));
  TensorNode *sp = sn.get(), *ap = an.get(), *op = on.get();
  return finish("scalar_mul", on, {sn, an}, [sp, ap, op]() {
    if (sp->requires_grad) {
      sp->ensure_grad();
      double acc = 0.0;
      for (std::size_t i = 0; i < op->grad.size(); ++i) acc += op->grad[i] * ap->data[i];
      sp->grad[0] += acc;
    }
    if (ap->requires_grad) {
      ap->ensure_grad();
      const double sv = sp->data[0];
      for (std::size_t i = 0; i < op->grad.size(); ++i) ap->grad[i] += sv * op->grad[i];
    }
  });
}

Tensor scalar_div(const Tensor& a, const Tensor& s) {
  auto an = require_node("scalar_div", a);
  auto sn = require_node("scalar_div", s);
  require_single("scalar_div", s);
  const double sv = sn->data[0];
  std::vector<double> out(an->data.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = an->data[i] / sv;
  auto on = new_node(an->shape, std::move(out));
  TensorNode *ap = an.get(), *sp = sn.get(), *op = on.get();
  return finish("scalar_div", on, {an, sn}, [ap, sp, op]() {
    const double sv = sp->data[0];
    if (ap->requires_grad) {
      ap->ensure_grad();
      for (std::size_t i = 0; i < op->grad.size(); ++i) ap->grad[i] += op->grad[i] / sv;
    }
    if (sp->requires_grad) {
      sp->ensure_grad();
      double acc = 0.0;
      for (std::size_t i = 0; i < op->grad.size(); ++i) acc -= op->grad[i] * op->data[i];
      sp->grad[0] += acc / sv;
    }
  });
}

// ---- reductions ----

Tensor sum(const Tensor& a) {
  auto an = require_node("sum", a);
  double acc = 0.0;
  for (double v : an->data) acc += v;
  auto on = new_node({1}, {acc});
  TensorNode *ap = an.get(), *op = on.get();
  return finish("sum", on, {an}, [ap, op]() {
    if (!ap->requires_grad) return;
    ap->ensure_grad();
    const double g = op->grad[0];
    for (auto& gv : ap->grad) gv += g;
  });
}

Tensor mean(const Tensor& a) {
  auto an = require_node("mean", a);
  double acc = 0.0;
  for (double v : an->data) acc += v;
  const double inv_n = 1.0 / static_cast<double>(an->data.size());
  auto on = new_node({1}, {acc * inv_n});
  TensorNode *ap = an.get(), *op = on.get();
  return finish("mean", on, {an}, [ap, op, inv_n]() {
    if (!ap->requires_grad) return;
    ap->ensure_grad();
    const double g = op->grad[0] * inv_n;
    for (auto& gv : ap->grad) gv += g;
  });
}

Tensor l2_norm(const Tensor& a) {
  auto an = require_node("l2_norm", a);
  double acc = 0.0;
  for (double v : an->data) acc += v * v;
  const double norm = std::sqrt(acc);
  auto on = new_node({1}, {norm});
  TensorNode *ap = an.get(), *op = on.get();
  return finish("l2_norm", on, {an}, [ap, op]() {
    if (!ap->requires_grad) return;
    const double n = op->data[0];
    if (n == 0.0) return;  // subgradient 0 at the origin
    ap->ensure_grad();
    const double g = op->grad[0] / n;
    for (std::size_t i = 0; i < ap->data.size(); ++i) ap->grad[i] += g * ap->data[i];
  });
}

Tensor dot(const Tensor& a, const Tensor& b) {
  auto an = require_node("dot", a);
  auto bn = require_node("dot", b);
  require_same_shape("dot", a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < an->data.size(); ++i) acc += an->data[i] * bn->data[i];
  auto on = new_node({1}, {acc});
  TensorNode *ap = an.get(), *bp = bn.get(), *op = on.get();
  return finish("dot", on, {an, bn}, [ap, bp, op]() {
    const double g = op->grad[0];
    if (ap->requires_grad) {
      ap->ensure_grad();
      for (std::size_t i = 0; i < ap->data.size(); ++i) ap->grad[i] += g * bp->data[i];
    }
    if (bp->requires_grad) {
      bp->ensure_grad();
      for (std::size_t i = 0; i < bp->data.size(); ++i) bp->grad[i] += g * ap->data[i];
    }
  });
}

// ---- linear algebra / structure ----

Tensor matmul(const Tensor& a, const Tensor& b) {
  auto an = require_node("matmul", a);
  auto bn = require_node("matmul", b);
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
    throw std::invalid_argument("matmul: incompatible shapes " + shape_str(a.shape()) + " x " +
                                shape_str(b.shape()));
  }
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = an->data[i * k + kk];
      const double* brow = &bn->data[kk * n];
      double* orow = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  auto on = new_node({m, n}, std::move(out));
  TensorNode *ap = an.get(), *bp = bn.get(), *op = on.get();
  return finish("matmul", on, {an, bn}, [ap, bp, op, m, k, n]() {
    if (ap->requires_grad) {
      ap->ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) {
          double acc = 0.0;
          const double* grow = &op->grad[i * n];
          const double* brow = &bp->data[kk * n];
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          ap->grad[i * k + kk] += acc;
        }
      }
    }
    if (bp->requires_grad) {
      bp->ensure_grad();
      for (std::size_t kk = 0; kk < k; ++kk) {
        for (std::size_t i = 0; i < m; ++i) {
          const double av = ap->data[i * k + kk];
          const double* grow = &op->grad[i * n];
          double* brow = &bp->grad[kk * n];
          for (std::size_t j = 0; j < n; ++j) brow[j] += av * grow[j];
        }
      }
    }
  });
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  auto xn = require_node("affine", x);
  auto wn = require_node("affine", w);
  auto bn = require_node("affine", b);
  if (x.rank() != 2 || w.rank() != 2 || b.rank() != 1 || x.shape()[1] != w.shape()[1] ||
      w.shape()[0] != b.shape()[0]) {
    throw std::invalid_argument("affine: incompatible shapes x" + shape_str(x.shape()) + " w" +
                                shape_str(w.shape()) + " b" + shape_str(b.shape()));
  }
  const std::size_t n = x.shape()[0], in = x.shape()[1], out_f = w.shape()[0];
  std::vector<double> out(n * out_f);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t o = 0; o < out_f; ++o) {
      double acc = bn->data[o];
      const double* xrow = &xn->data[i * in];
      const double* wrow = &wn->data[o * in];
      for (std::size_t j = 0; j < in; ++j) acc += xrow[j] * wrow[j];
      out[i * out_f + o] = acc;
    }
  }
  auto on = new_node({n, out_f}, std::move(out));
  TensorNode *xp = xn.get(), *wp = wn.get(), *bp = bn.get(), *op = on.get();
  return finish("affine", on, {xn, wn, bn}, [xp, wp, bp, op, n, in, out_f]() {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t o = 0; o < out_f; ++o) {
        const double g = op->grad[i * out_f + o];
        if (g == 0.0) continue;
        if (xp->requires_grad) {
          xp->ensure_grad();
          double* xg = &xp->grad[i * in];
          const double* wrow = &wp->data[o * in];
          for (std::size_t j = 0; j < in; ++j) xg[j] += g * wrow[j];
        }
        if (wp->requires_grad) {
          wp->ensure_grad();
          double* wg = &wp->grad[o * in];
          const double* xrow = &xp->data[i * in];
          for (std::size_t j = 0; j < in; ++j) wg[j] += g * xrow[j];
        }
        if (bp->requires_grad) {
          bp->ensure_grad();
          bp->grad[o] += g;
        }
      }
    }
  });
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride,
              std::size_t pad) {
  auto xn = require_node("conv2d", x);
  auto wn = require_node("conv2d", w);
  const bool has_bias = b.defined();
  NodePtr bn = has_bias ? require_node("conv2d", b) : nullptr;
  if (x.rank() != 4 || w.rank() != 4) {
    throw std::invalid_argument("conv2d: expected rank-4 input and kernel, got " +
                                shape_str(x.shape()) + " and " + shape_str(w.shape()));
  }
  if (x.shape()[1] != w.shape()[1]) {
    throw std::invalid_argument("conv2d: channel mismatch " + shape_str(x.shape()) + " vs kernel " +
                                shape_str(w.shape()));
  }
  if (stride == 0) throw std::invalid_argument("conv2d: stride must be >= 1");
  const std::size_t N = x.shape()[0], C = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
  const std::size_t F = w.shape()[0], KH = w.shape()[2], KW = w.shape()[3];
  if (has_bias && (b.rank() != 1 || b.shape()[0] != F)) {
    throw std::invalid_argument("conv2d: bias shape " + shape_str(b.shape()) +
                                " does not match filter count " + std::to_string(F));
  }
  if (H + 2 * pad < KH || W + 2 * pad < KW) {
    throw std::invalid_argument("conv2d: kernel larger than padded input");
  }
  const std::size_t OH = (H + 2 * pad - KH) / stride + 1;
  const std::size_t OW = (W + 2 * pad - KW) / stride + 1;

  std::vector<double> out(N * F * OH * OW, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t f = 0; f < F; ++f) {
      const double bias = has_bias ? bn->data[f] : 0.0;
      for (std::size_t oh = 0; oh < OH; ++oh) {
        for (std::size_t ow = 0; ow < OW; ++ow) {
          double acc = bias;
          for (std::size_t c = 0; c < C; ++c) {
            const double* xplane = &xn->data[((n * C + c) * H) * W];
            const double* wplane = &wn->data[((f * C + c) * KH) * KW];
            for (std::size_t kh = 0; kh < KH; ++kh) {
              const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * stride + kh) -
                                        static_cast<std::ptrdiff_t>(pad);
              if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
              for (std::size_t kw = 0; kw < KW; ++kw) {
                const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * stride + kw) -
                                          static_cast<std::ptrdiff_t>(pad);
                if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(W)) continue;
                acc += xplane[ih * static_cast<std::ptrdiff_t>(W) + iw] * wplane[kh * KW + kw];
              }
            }
          }
          out[((n * F + f) * OH + oh) * OW + ow] = acc;
        }
      }
    }
  }
  auto on = new_node({N, F, OH, OW}, std::move(out));
  TensorNode *xp = xn.get(), *wp = wn.get(), *op = on.get();
  TensorNode* bp = has_bias ? bn.get() : nullptr;
  std::vector<NodePtr> parents = {xn, wn};
  if (has_bias) parents.push_back(bn);
  return finish("conv2d", on, std::move(parents),
                [xp, wp, bp, op, N, C, H, W, F, KH, KW, OH, OW, stride, pad]() {
    const bool gx = xp->requires_grad;
    const bool gw = wp->requires_grad;
    const bool gb = bp != nullptr && bp->requires_grad;
    if (gx) xp->ensure_grad();
    if (gw) wp->ensure_grad();
    if (gb) bp->ensure_grad();
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t oh = 0; oh < OH; ++oh) {
          for (std::size_t ow = 0; ow < OW; ++ow) {
            const double g = op->grad[((n * F + f) * OH + oh) * OW + ow];
            if (g == 0.0) continue;
            if (gb) bp->grad[f] += g;
            if (!gx && !gw) continue;
            for (std::size_t c = 0; c < C; ++c) {
              const std::size_t xbase = ((n * C + c) * H) * W;
              const std::size_t wbase = ((f * C + c) * KH) * KW;
              for (std::size_t kh = 0; kh < KH; ++kh) {
                const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * stride + kh) -
                                          static_cast<std::ptrdiff_t>(pad);
                if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
                for (std::size_t kw = 0; kw < KW; ++kw) {
                  const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * stride + kw) -
                                            static_cast<std::ptrdiff_t>(pad);
                  if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(W)) continue;
                  const std::size_t xi = xbase + static_cast<std::size_t>(ih) * W +
                                         static_cast<std::size_t>(iw);
                  const std::size_t wi = wbase + kh * KW + kw;
                  if (gx) xp->grad[xi] += g * wp->data[wi];
                  if (gw) wp->grad[wi] += g * xp->data[xi];
                }
              }
            }
          }
        }
      }
    }
  });
}

Tensor upsample_nearest2x(const Tensor& x) {
  auto xn = require_node("upsample_nearest2x", x);
  if (x.rank() != 4) {
    throw std::invalid_argument("upsample_nearest2x: expected rank-4 input, got " +
                                shape_str(x.shape()));
  }
  const std::size_t N = x.shape()[0], C = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
  const std::size_t OH = 2 * H, OW = 2 * W;
  std::vector<double> out(N * C * OH * OW);
  for (std::size_t nc = 0; nc < N * C; ++nc) {
    const double* src = &xn->data[nc * H * W];
    double* dst = &out[nc * OH * OW];
    for (std::size_t i = 0; i < H; ++i) {
      for (std::size_t j = 0; j < W; ++j) {
        const double v = src[i * W + j];
        dst[(2 * i) * OW + 2 * j] = v;
        dst[(2 * i) * OW + 2 * j + 1] = v;
        dst[(2 * i + 1) * OW + 2 * j] = v;
        dst[(2 * i + 1) * OW + 2 * j + 1] = v;
      }
    }
  }
  auto on = new_node({N, C, OH, OW}, std::move(out));
  TensorNode *xp = xn.get(), *op = on.get();
  return finish("upsample_nearest2x", on, {xn}, [xp, op, N, C, H, W, OH, OW]() {
    if (!xp->requires_grad) return;
    xp->ensure_grad();
    for (std::size_t nc = 0; nc < N * C; ++nc) {
      const double* g = &op->grad[nc * OH * OW];
      double* dst = &xp->grad[nc * H * W];
      for (std::size_t i = 0; i < H; ++i) {
        for (std::size_t j = 0; j < W; ++j) {
          dst[i * W + j] += g[(2 * i) * OW + 2 * j] + g[(2 * i) * OW + 2 * j + 1] +
                            g[(2 * i + 1) * OW + 2 * j] + g[(2 * i + 1) * OW + 2 * j + 1];
        }
      }
    }
  });
}

Tensor adaptive_avg_pool2d(const Tensor& x, std::size_t out_h, std::size_t out_w) {
  auto xn = require_node("adaptive_avg_pool2d", x);
  if (x.rank() != 3 && x.rank() != 4) {
    throw std::invalid_argument("adaptive_avg_pool2d: expected rank-3 or rank-4 input, got " +
                                shape_str(x.shape()));
  }
  if (out_h == 0 || out_w == 0) {
    throw std::invalid_argument("adaptive_avg_pool2d: output extents must be positive");
  }
  const bool batched = x.rank() == 4;
  const std::size_t N = batched ? x.shape()[0] : 1;
  const std::size_t C = batched ? x.shape()[1] : x.shape()[0];
  const std::size_t H = batched ? x.shape()[2] : x.shape()[1];
  const std::size_t W = batched ? x.shape()[3] : x.shape()[2];

  // Even partition: cell i covers [floor(i*H/OH), ceil((i+1)*H/OH)).
  auto lo = [](std::size_t i, std::size_t in, std::size_t out) { return (i * in) / out; };
  auto hi = [](std::size_t i, std::size_t in, std::size_t out) {
    return ((i + 1) * in + out - 1) / out;
  };

  std::vector<double> out(N * C * out_h * out_w);
  for (std::size_t nc = 0; nc < N * C; ++nc) {
    const double* src = &xn->data[nc * H * W];
    double* dst = &out[nc * out_h * out_w];
    for (std::size_t i = 0; i < out_h; ++i) {
      const std::size_t h0 = lo(i, H, out_h), h1 = hi(i, H, out_h);
      for (std::size_t j = 0; j < out_w; ++j) {
        const std::size_t w0 = lo(j, W, out_w), w1 = hi(j, W, out_w);
        double acc = 0.0;
        for (std::size_t r = h0; r < h1; ++r) {
          for (std::size_t c = w0; c < w1; ++c) acc += src[r * W + c];
        }
        dst[i * out_w + j] = acc / static_cast<double>((h1 - h0) * (w1 - w0));
      }
    }
  }
  Shape oshape = batched ? Shape{N, C, out_h, out_w} : Shape{C, out_h, out_w};
  auto on = new_node(std::move(oshape), std::move(out));
  TensorNode *xp = xn.get(), *op = on.get();
  return finish("adaptive_avg_pool2d", on, {xn}, [xp, op, N, C, H, W, out_h, out_w, lo, hi]() {
    if (!xp->requires_grad) return;
    xp->ensure_grad();
    for (std::size_t nc = 0; nc < N * C; ++nc) {
      const double* g = &op->grad[nc * out_h * out_w];
      double* dst = &xp->grad[nc * H * W];
      for (std::size_t i = 0; i < out_h; ++i) {
        const std::size_t h0 = lo(i, H, out_h), h1 = hi(i, H, out_h);
        for (std::size_t j = 0; j < out_w; ++j) {
          const std::size_t w0 = lo(j, W, out_w), w1 = hi(j, W, out_w);
          const double gv = g[i * out_w + j] / static_cast<double>((h1 - h0) * (w1 - w0));
          for (std::size_t r = h0; r < h1; ++r) {
            for (std::size_t c = w0; c < w1; ++c) dst[r * W + c] += gv;
          }
        }
      }
    }
  });
}

Tensor reshape(const Tensor& a, const Shape& shape) {
  auto an = require_node("reshape", a);
  validate_shape(shape);
  if (shape_numel(shape) != an->data.size()) {
    throw std::invalid_argument("reshape: element count mismatch " + shape_str(an->shape) +
                                " -> " + shape_str(shape));
  }
  auto on = new_node(shape, an->data);
  TensorNode *ap = an.get(), *op = on.get();
  return finish("reshape", on, {an}, [ap, op]() { accumulate(ap, op->grad); });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw std::invalid_argument("concat: empty input list");
  const Shape& ref = parts[0].shape();
  if (axis >= ref.size()) throw std::invalid_argument("concat: axis out of range");
  std::size_t axis_total = 0;
  for (const auto& p : parts) {
    require_node("concat", p);
    const Shape& s = p.shape();
    if (s.size() != ref.size()) {
      throw std::invalid_argument("concat: rank mismatch " + shape_str(ref) + " vs " + shape_str(s));
    }
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d != axis && s[d] != ref[d]) {
        throw std::invalid_argument("concat: shape mismatch " + shape_str(ref) + " vs " +
                                    shape_str(s));
      }
    }
    axis_total += s[axis];
  }
  Shape oshape = ref;
  oshape[axis] = axis_total;
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= ref[d];
  for (std::size_t d = axis + 1; d < ref.size(); ++d) inner *= ref[d];

  std::vector<double> out(shape_numel(oshape));
  std::size_t offset = 0;  // running offset along the axis
  for (const auto& p : parts) {
    const auto& src = p.data();
    const std::size_t ax = p.shape()[axis];
    for (std::size_t o = 0; o < outer; ++o) {
      const double* s = &src[o * ax * inner];
      double* dptr = &out[(o * axis_total + offset) * inner];
      std::copy(s, s + ax * inner, dptr);
    }
    offset += ax;
  }
  auto on = new_node(std::move(oshape), std::move(out));
  std::vector<NodePtr> parent_nodes;
  parent_nodes.reserve(parts.size());
  std::vector<std::size_t> axis_sizes;
  for (const auto& p : parts) {
    parent_nodes.push_back(p.node());
    axis_sizes.push_back(p.shape()[axis]);
  }
  TensorNode* op = on.get();
  std::vector<TensorNode*> raw;
  raw.reserve(parent_nodes.size());
  for (auto& pn : parent_nodes) raw.push_back(pn.get());
  return finish("concat", on, std::move(parent_nodes),
                [raw, axis_sizes, op, outer, inner, axis_total]() {
    std::size_t offset = 0;
    for (std::size_t pi = 0; pi < raw.size(); ++pi) {
      TensorNode* p = raw[pi];
      const std::size_t ax = axis_sizes[pi];
      if (p->requires_grad) {
        p->ensure_grad();
        for (std::size_t o = 0; o < outer; ++o) {
          const double* g = &op->grad[(o * axis_total + offset) * inner];
          double* dst = &p->grad[o * ax * inner];
          for (std::size_t i = 0; i < ax * inner; ++i) dst[i] += g[i];
        }
      }
      offset += ax;
    }
  });
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t start, std::size_t count) {
  auto an = require_node("slice", a);
  const Shape& s = an->shape;
  if (axis >= s.size()) throw std::invalid_argument("slice: axis out of range");
  if (count == 0 || start + count > s[axis]) {
    throw std::invalid_argument("slice: range [" + std::to_string(start) + ", " +
                                std::to_string(start + count) + ") out of bounds for " +
                                shape_str(s));
  }
  Shape oshape = s;
  oshape[axis] = count;
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= s[d];
  for (std::size_t d = axis + 1; d < s.size(); ++d) inner *= s[d];
  const std::size_t ax = s[axis];

  std::vector<double> out(shape_numel(oshape));
  for (std::size_t o = 0; o < outer; ++o) {
    const double* src = &an->data[(o * ax + start) * inner];
    std::copy(src, src + count * inner, &out[o * count * inner]);
  }
  auto on = new_node(std::move(oshape), std::move(out));
  TensorNode *ap = an.get(), *op = on.get();
  return finish("slice", on, {an}, [ap, op, outer, inner, ax, start, count]() {
    if (!ap->requires_grad) return;
    ap->ensure_grad();
    for (std::size_t o = 0; o < outer; ++o) {
      const double* g = &op->grad[o * count * inner];
      double* dst = &ap->grad[(o * ax + start) * inner];
      for (std::size_t i = 0; i < count * inner; ++i) dst[i] += g[i];
    }
  });
}

Tensor center_rows(const Tensor& a) {
  auto an = require_node("center_rows", a);
  if (a.rank() != 2) {
    throw std::invalid_argument("center_rows: expected rank-2 input, got " + shape_str(a.shape()));
  }
  const std::size_t r = a.shape()[0], m = a.shape()[1];
  std::vector<double> out(r * m);
  for (std::size_t i = 0; i < r; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < m; ++j) mu += an->data[i * m + j];
    mu /= static_cast<double>(m);
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = an->data[i * m + j] - mu;
  }
  auto on = new_node(an->shape, std::move(out));
  TensorNode *ap = an.get(), *op = on.get();
  return finish("center_rows", on, {an}, [ap, op, r, m]() {
    if (!ap->requires_grad) return;
    ap->ensure_grad();
    for (std::size_t i = 0; i < r; ++i) {
      double gmu = 0.0;
      for (std::size_t j = 0; j < m; ++j) gmu += op->grad[i * m + j];
      gmu /= static_cast<double>(m);
      for (std::size_t j = 0; j < m; ++j) ap->grad[i * m + j] += op->grad[i * m + j] - gmu;
    }
  });
}

Tensor self_correlation(const Tensor& m, std::size_t* degenerate_positions) {
  auto mn = require_node("self_correlation", m);
  if (m.rank() != 2) {
    throw std::invalid_argument("self_correlation: expected rank-2 input, got " +
                                shape_str(m.shape()));
  }
  const std::size_t c = m.shape()[0], p = m.shape()[1];

  // Column norms and normalized columns (unit vectors, column-major scratch).
  std::vector<double> norms(p, 0.0);
  std::vector<double> unit(c * p, 0.0);  // unit[j*c + i] = m[i][j] / |col_j|
  std::size_t degenerate = 0;
  for (std::size_t j = 0; j < p; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
      const double v = mn->data[i * p + j];
      acc += v * v;
    }
    norms[j] = std::sqrt(acc);
    if (norms[j] == 0.0) {
      ++degenerate;
      continue;
    }
    for (std::size_t i = 0; i < c; ++i) unit[j * c + i] = mn->data[i * p + j] / norms[j];
  }
  if (degenerate_positions) *degenerate_positions = degenerate;

  std::vector<double> out(p * p, 0.0);
  for (std::size_t a = 0; a < p; ++a) {
    if (norms[a] == 0.0) continue;
    const double* ua = &unit[a * c];
    for (std::size_t b = a; b < p; ++b) {
      if (norms[b] == 0.0) continue;
      const double* ub = &unit[b * c];
      double acc = 0.0;
      for (std::size_t i = 0; i < c; ++i) acc += ua[i] * ub[i];
      out[a * p + b] = acc;
      out[b * p + a] = acc;
    }
  }
  auto on = new_node({p, p}, std::move(out));
  TensorNode *mp = mn.get(), *op = on.get();
  return finish("self_correlation", on, {mn},
                [mp, op, c, p, norms = std::move(norms), unit = std::move(unit)]() {
    if (!mp->requires_grad) return;
    mp->ensure_grad();
    // C_ab = u_a . u_b with unit columns; each entry feeds both columns:
    // dC_ab/d(col_a) = (u_b - C_ab u_a) / |col_a| and symmetrically for b.
    for (std::size_t a = 0; a < p; ++a) {
      if (norms[a] == 0.0) continue;
      const double* ua = &unit[a * c];
      for (std::size_t b = 0; b < p; ++b) {
        if (norms[b] == 0.0) continue;
        const double g = op->grad[a * p + b];
        if (g == 0.0) continue;
        const double* ub = &unit[b * c];
        const double cab = op->data[a * p + b];
        const double inv_na = 1.0 / norms[a];
        const double inv_nb = 1.0 / norms[b];
        for (std::size_t i = 0; i < c; ++i) {
          mp->grad[i * p + a] += g * (ub[i] - cab * ua[i]) * inv_na;
          mp->grad[i * p + b] += g * (ua[i] - cab * ub[i]) * inv_nb;
        }
      }
    }
  });
}

// ---- vector softmax ----

Tensor softmax(const Tensor& a) {
  auto an = require_node("softmax", a);
  if (a.rank() != 1) {
    throw std::invalid_argument("softmax: expected rank-1 input, got " + shape_str(a.shape()));
  }
  const std::size_t n = an->data.size();
  double mx = an->data[0];
  for (double v : an->data) mx = std::max(mx, v);
  std::vector<double> out(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(an->data[i] - mx);
    z += out[i];
  }
  for (auto& v : out) v /= z;
  auto on = new_node(an->shape, std::move(out));
  TensorNode *ap = an.get(), *op = on.get();
  return finish("softmax", on, {an}, [ap, op, n]() {
    if (!ap->requires_grad) return;
    ap->ensure_grad();
    double gs = 0.0;
    for (std::size_t i = 0; i < n; ++i) gs += op->grad[i] * op->data[i];
    for (std::size_t i = 0; i < n; ++i) ap->grad[i] += op->data[i] * (op->grad[i] - gs);
  });
}

Tensor log_softmax(const Tensor& a) {
  auto an = require_node("log_softmax", a);
  if (a.rank() != 1) {
    throw std::invalid_argument("log_softmax: expected rank-1 input, got " + shape_str(a.shape()));
  }
  const std::size_t n = an->data.size();
  double mx = an->data[0];
  for (double v : an->data) mx = std::max(mx, v);
  double z = 0.0;
  for (double v : an->data) z += std::exp(v - mx);
  const double logz = mx + std::log(z);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = an->data[i] - logz;
  auto on = new_node(an->shape, std::move(out));
  TensorNode *ap = an.get(), *op = on.get();
  return finish("log_softmax", on, {an}, [ap, op, n]() {
    if (!ap->requires_grad) return;
    ap->ensure_grad();
    double gs = 0.0;
    for (std::size_t i = 0; i < n; ++i) gs += op->grad[i];
    for (std::size_t i = 0; i < n; ++i) {
      ap->grad[i] += op->grad[i] - std::exp(op->data[i]) * gs;
    }
  });
}

}  // namespace gsgan
