#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mpad/rng.hpp"

namespace mpad::nd {

using Shape = std::vector<int>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// One recorded node of the computation tape. Interior nodes keep their
// saved activations alive through the parent pointers; backward() walks the
// tape in reverse topological order exactly once per call.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // persistent; leaves accumulate across backward calls
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Pushes this node's gradient (grad_in) into the parents' pass-local
  // buffers. Null for leaves.
  std::function<void(const std::vector<double>& grad_in,
                     std::vector<std::vector<double>>& parent_grads)>
      backprop;

  std::size_t numel() const { return value.size(); }
};

// Value-semantics handle to a tape node.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor full(const Shape& shape, double v, bool requires_grad = false);
  static Tensor from_data(const Shape& shape, std::vector<double> data,
                          bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool valid() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t numel() const { return node_->numel(); }
  const std::vector<double>& data() const { return node_->value; }
  std::vector<double>& mutable_data() { return node_->value; }
  const std::vector<double>& grad() const { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }
  double item() const;

  void zero_grad();
  std::shared_ptr<Node> node() const { return node_; }

  Tensor detach_copy(bool requires_grad = false) const;

 private:
  std::shared_ptr<Node> node_;
};

// Xavier (Glorot) uniform init over [-a, a], a = sqrt(6 / (fan_in + fan_out)).
// Dense weights are (in, out); conv/tconv weights are (O, I, K, K) with
// fans I*K*K and O*K*K.
Tensor xavier_init(const Shape& shape, Rng& rng, bool requires_grad = true);

// x: (N, C, H, W), w: (O, C, K, K). Cross-correlation, no bias.
Tensor conv2d(const Tensor& x, const Tensor& w, int stride, int padding);

// Transposed convolution (adjoint of conv2d in its input argument).
// x: (N, O, H, W), w: (O, I, K, K) -> (N, I, H', W') with
// H' = (H-1)*stride - 2*padding + K + out_pad.
Tensor tconv2d(const Tensor& x, const Tensor& w, int stride, int padding,
               int out_pad = 0);

// x: (N, in) times w: (in, out), no bias.
Tensor dense(const Tensor& x, const Tensor& w);

Tensor leaky_relu(const Tensor& x, double slope);
Tensor relu(const Tensor& x);

// Mean of elementwise squared differences, as a scalar tape node.
Tensor mse(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double s);
Tensor add_scalar(const Tensor& x, double s);
Tensor reshape(const Tensor& x, const Shape& new_shape);
Tensor sum_all(const Tensor& x);
// (N, p) -> (N,): per-row sum.
Tensor row_sum(const Tensor& x);
// Subtract a constant row vector from every row of (N, p).
Tensor sub_rowvec(const Tensor& x, const std::vector<double>& v);

// Reverse-mode pass from a scalar loss. Interior gradients live in
// pass-local buffers; leaf .grad accumulates across repeated calls until
// zero_grad() is used.
void backward(const Tensor& loss);

// Named, ordered parameter collection. Bias-free by construction: only
// weight tensors are ever registered.
using NamedParams = std::vector<std::pair<std::string, Tensor>>;

void zero_grads(NamedParams& params);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long t = 0;
  // Moment buffers keyed by parameter name, allocated on first step.
  std::vector<std::pair<std::string, std::vector<double>>> m;
  std::vector<std::pair<std::string, std::vector<double>>> v;
};

// Adam with bias correction. The L2 regularizer is applied as
// weight_decay * w added to the raw gradient before the moment updates.
void adam_step(NamedParams& params, AdamState& state, double weight_decay);

// Throws if any value is non-finite. Debug builds call this after every op.
void check_finite(const Tensor& t, const char* where);

}  // namespace mpad::nd
