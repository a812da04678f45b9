#pragma once
// Dense double-precision tensors with define-by-run reverse-mode autodiff.
//
// Data is row-major. Every op validates operand shapes and rejects non-finite
// forward values. The graph is rebuilt on each forward pass and freed when the
// last Tensor referencing it goes away; parameter tensors are leaves whose
// gradients accumulate across backward() calls until zero_grad().

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace gsgan {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);

namespace detail {
struct TensorNode;
}

// Scoped switch that disables graph construction (forward values only).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

bool grad_enabled();

class Tensor {
 public:
  Tensor();
  ~Tensor();
  Tensor(const Tensor&);
  Tensor(Tensor&&) noexcept;
  Tensor& operator=(const Tensor&);
  Tensor& operator=(Tensor&&) noexcept;

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor full(const Shape& shape, double value, bool requires_grad = false);
  static Tensor from_data(const Shape& shape, std::vector<double> data,
                          bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t size() const;
  std::size_t rank() const;

  double value() const;  // single-element tensors only
  double at(std::size_t flat) const;

  // Mutable access exists for parameter updates and finite-difference probes;
  // tensors are otherwise treated as immutable after construction.
  std::vector<double>& data();
  const std::vector<double>& data() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool v);
  const std::vector<double>& grad() const;  // zero-filled if never written
  void zero_grad();
  Tensor detach() const;

  // Reverse-mode pass from a scalar; throws if this tensor is not scalar.
  void backward() const;

  explicit Tensor(std::shared_ptr<detail::TensorNode> node);
  const std::shared_ptr<detail::TensorNode>& node() const { return node_; }

 private:
  std::shared_ptr<detail::TensorNode> node_;
};

// ---- elementwise ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor scale(const Tensor& a, double c);
// y = mul_c * x + add_c, elementwise with constants.
Tensor affine_const(const Tensor& a, double mul_c, double add_c);
Tensor clamp(const Tensor& a, double lo, double hi);
Tensor leaky_relu(const Tensor& a, double negative_slope = 0.2);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sin(const Tensor& a);
Tensor cos(const Tensor& a);
Tensor acos(const Tensor& a);
// Elementwise smooth-l1 with unit threshold: 0.5*e^2 for |e|<1, |e|-0.5 else.
Tensor smooth_l1(const Tensor& a, const Tensor& b);

// ---- scalar-tensor ----
Tensor scalar_mul(const Tensor& s, const Tensor& a);  // s has one element
Tensor scalar_div(const Tensor& a, const Tensor& s);

// ---- reductions ----
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor l2_norm(const Tensor& a);
Tensor dot(const Tensor& a, const Tensor& b);  // same shape, flattened

// ---- linear algebra / structure ----
Tensor matmul(const Tensor& a, const Tensor& b);  // {m,k} x {k,n}
// x {n,in} * w^T {in,out} + b {out} -> {n,out}
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b);
// x {N,C,H,W}, w {F,C,kh,kw}, optional bias {F}; zero padding.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b,
              std::size_t stride, std::size_t pad);
Tensor upsample_nearest2x(const Tensor& x);  // {N,C,H,W} -> {N,C,2H,2W}
// Even-partition adaptive mean pooling; accepts {C,H,W} or {N,C,H,W}.
Tensor adaptive_avg_pool2d(const Tensor& x, std::size_t out_h, std::size_t out_w);
Tensor reshape(const Tensor& a, const Shape& shape);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor slice(const Tensor& a, std::size_t axis, std::size_t start, std::size_t count);
// Subtract each row's mean from the row of a rank-2 tensor.
Tensor center_rows(const Tensor& a);
// All-pairs cosine similarity between the p columns of m {c,p} -> {p,p}.
// Zero-norm columns get similarity 0 everywhere; their count is reported
// through degenerate_positions when non-null.
Tensor self_correlation(const Tensor& m, std::size_t* degenerate_positions = nullptr);

// ---- vector softmax ----
Tensor softmax(const Tensor& a);      // rank-1
Tensor log_softmax(const Tensor& a);  // rank-1

}  // namespace gsgan
