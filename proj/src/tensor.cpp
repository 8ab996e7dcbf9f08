#include "mpad/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace mpad::nd {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("invalid shape: dimension " + std::to_string(d));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ")";
  return os.str();
}

void check_finite(const Tensor& t, const char* where) {
  for (double v : t.data()) {
    if (!std::isfinite(v))
      throw std::runtime_error(std::string("non-finite value in ") + where);
  }
}

namespace {

#ifndef NDEBUG
inline void debug_check(const Tensor& t, const char* where) { check_finite(t, where); }
#else
inline void debug_check(const Tensor&, const char*) {}
#endif

std::shared_ptr<Node> make_node(Shape shape, std::vector<double> value) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  return n;
}

void init_leaf_grad(const std::shared_ptr<Node>& n) {
  if (n->requires_grad) n->grad.assign(n->value.size(), 0.0);
}

}  // namespace

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
  auto n = make_node(shape, std::vector<double>(shape_numel(shape), 0.0));
  n->requires_grad = requires_grad;
  init_leaf_grad(n);
  return Tensor(n);
}

Tensor Tensor::full(const Shape& shape, double v, bool requires_grad) {
  auto n = make_node(shape, std::vector<double>(shape_numel(shape), v));
  n->requires_grad = requires_grad;
  init_leaf_grad(n);
  return Tensor(n);
}

Tensor Tensor::from_data(const Shape& shape, std::vector<double> data,
                         bool requires_grad) {
  if (shape_numel(shape) != data.size())
    throw std::invalid_argument("from_data: shape " + shape_str(shape) +
                                " does not match " + std::to_string(data.size()) +
                                " values");
  auto n = make_node(shape, std::move(data));
  n->requires_grad = requires_grad;
  init_leaf_grad(n);
  return Tensor(n);
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from_data({1}, {v}, requires_grad);
}

double Tensor::item() const {
  if (numel() != 1) throw std::invalid_argument("item() on non-scalar tensor");
  return node_->value[0];
}

void Tensor::zero_grad() {
  node_->grad.assign(node_->value.size(), 0.0);
}

Tensor Tensor::detach_copy(bool requires_grad) const {
  auto n = make_node(node_->shape, node_->value);
  n->requires_grad = requires_grad;
  init_leaf_grad(n);
  return Tensor(n);
}

Tensor xavier_init(const Shape& shape, Rng& rng, bool requires_grad) {
  if (shape.size() < 2)
    throw std::invalid_argument("xavier_init: need >=2 dims, got " + shape_str(shape));
  shape_numel(shape);  // rejects zero/negative dims
  double fan_in, fan_out;
  if (shape.size() == 2) {
    fan_in = shape[0];
    fan_out = shape[1];
  } else {
    // (O, I, K, K...)
    double receptive = 1.0;
    for (std::size_t i = 2; i < shape.size(); ++i) receptive *= shape[i];
    fan_out = shape[0] * receptive;
    fan_in = shape[1] * receptive;
  }
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  std::vector<double> data(shape_numel(shape));
  for (double& v : data) v = rng.uniform(-a, a);
  return Tensor::from_data(shape, std::move(data), requires_grad);
}

namespace {

// Builds an op node over parents with a given backprop closure.
Tensor make_op(Shape shape, std::vector<double> value,
               std::vector<Tensor> parents,
               std::function<void(const std::vector<double>&,
                                  std::vector<std::vector<double>>&)>
                   backprop,
               const char* name) {
  auto n = make_node(std::move(shape), std::move(value));
  bool any_grad = false;
  for (const auto& p : parents) {
    n->parents.push_back(p.node());
    any_grad = any_grad || p.requires_grad() || p.node()->backprop;
  }
  n->requires_grad = any_grad;
  if (any_grad) n->backprop = std::move(backprop);
  Tensor t(n);
  debug_check(t, name);
  return t;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, int stride, int padding) {
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  if (xs.size() != 4 || ws.size() != 4)
    throw std::invalid_argument("conv2d: expected 4-d input and weight");
  if (stride < 1 || padding < 0)
    throw std::invalid_argument("conv2d: stride must be >=1 and padding >=0");
  const int N = xs[0], C = xs[1], H = xs[2], W = xs[3];
  const int O = ws[0], K = ws[2];
  if (ws[1] != C)
    throw std::invalid_argument("conv2d: input has " + std::to_string(C) +
                                " channels but weight expects " + std::to_string(ws[1]));
  if (ws[2] != ws[3]) throw std::invalid_argument("conv2d: non-square kernel");
  if (K > H + 2 * padding || K > W + 2 * padding)
    throw std::invalid_argument("conv2d: kernel larger than padded input");
  const int Ho = (H + 2 * padding - K) / stride + 1;
  const int Wo = (W + 2 * padding - K) / stride + 1;

  const auto& xd = x.data();
  const auto& wd = w.data();
  std::vector<double> out(static_cast<std::size_t>(N) * O * Ho * Wo, 0.0);

  auto xat = [&](int n, int c, int i, int j) {
    return xd[((static_cast<std::size_t>(n) * C + c) * H + i) * W + j];
  };
  for (int n = 0; n < N; ++n)
    for (int o = 0; o < O; ++o)
      for (int i = 0; i < Ho; ++i)
        for (int j = 0; j < Wo; ++j) {
          double acc = 0.0;
          for (int c = 0; c < C; ++c)
            for (int ki = 0; ki < K; ++ki) {
              const int hi = i * stride - padding + ki;
              if (hi < 0 || hi >= H) continue;
              const std::size_t wbase = ((static_cast<std::size_t>(o) * C + c) * K + ki) * K;
              for (int kj = 0; kj < K; ++kj) {
                const int wi = j * stride - padding + kj;
                if (wi < 0 || wi >= W) continue;
                acc += xat(n, c, hi, wi) * wd[wbase + kj];
              }
            }
          out[((static_cast<std::size_t>(n) * O + o) * Ho + i) * Wo + j] = acc;
        }

  auto xn = x.node();
  auto wn = w.node();
  auto bp = [=](const std::vector<double>& g, std::vector<std::vector<double>>& pg) {
    auto& gx = pg[0];
    auto& gw = pg[1];
    for (int n = 0; n < N; ++n)
      for (int o = 0; o < O; ++o)
        for (int i = 0; i < Ho; ++i)
          for (int j = 0; j < Wo; ++j) {
            const double go = g[((static_cast<std::size_t>(n) * O + o) * Ho + i) * Wo + j];
            if (go == 0.0) continue;
            for (int c = 0; c < C; ++c)
              for (int ki = 0; ki < K; ++ki) {
                const int hi = i * stride - padding + ki;
                if (hi < 0 || hi >= H) continue;
                const std::size_t wbase =
                    ((static_cast<std::size_t>(o) * C + c) * K + ki) * K;
                const std::size_t xbase =
                    ((static_cast<std::size_t>(n) * C + c) * H + hi) * W;
                for (int kj = 0; kj < K; ++kj) {
                  const int wi = j * stride - padding + kj;
                  if (wi < 0 || wi >= W) continue;
                  gx[xbase + wi] += go * wn->value[wbase + kj];
                  gw[wbase + kj] += go * xn->value[xbase + wi];
                }
              }
          }
  };
  return make_op({N, O, Ho, Wo}, std::move(out), {x, w}, bp, "conv2d");
}

Tensor tconv2d(const Tensor& x, const Tensor& w, int stride, int padding,
               int out_pad) {
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  if (xs.size() != 4 || ws.size() != 4)
    throw std::invalid_argument("tconv2d: expected 4-d input and weight");
  if (stride < 1 || padding < 0 || out_pad < 0)
    throw std::invalid_argument("tconv2d: bad stride/padding");
  const int N = xs[0], O = xs[1], H = xs[2], W = xs[3];
  const int I = ws[1], K = ws[2];
  if (ws[0] != O)
    throw std::invalid_argument("tconv2d: input has " + std::to_string(O) +
                                " channels but weight expects " + std::to_string(ws[0]));
  if (ws[2] != ws[3]) throw std::invalid_argument("tconv2d: non-square kernel");
  const int Ho = (H - 1) * stride - 2 * padding + K + out_pad;
  const int Wo = (W - 1) * stride - 2 * padding + K + out_pad;
  if (Ho <= 0 || Wo <= 0)
    throw std::invalid_argument("tconv2d: output size collapses to zero");

  const auto& xd = x.data();
  const auto& wd = w.data();
  std::vector<double> out(static_cast<std::size_t>(N) * I * Ho * Wo, 0.0);
  for (int n = 0; n < N; ++n)
    for (int o = 0; o < O; ++o)
      for (int i = 0; i < H; ++i)
        for (int j = 0; j < W; ++j) {
          const double xv = xd[((static_cast<std::size_t>(n) * O + o) * H + i) * W + j];
          if (xv == 0.0) continue;
          for (int c = 0; c < I; ++c)
            for (int ki = 0; ki < K; ++ki) {
              const int hi = i * stride - padding + ki;
              if (hi < 0 || hi >= Ho) continue;
              const std::size_t wbase = ((static_cast<std::size_t>(o) * I + c) * K + ki) * K;
              const std::size_t obase = ((static_cast<std::size_t>(n) * I + c) * Ho + hi) * Wo;
              for (int kj = 0; kj < K; ++kj) {
                const int wi = j * stride - padding + kj;
                if (wi < 0 || wi >= Wo) continue;
                out[obase + wi] += xv * wd[wbase + kj];
              }
            }
        }

  auto xn = x.node();
  auto wn = w.node();
  auto bp = [=](const std::vector<double>& g, std::vector<std::vector<double>>& pg) {
    auto& gx = pg[0];
    auto& gw = pg[1];
    // gx is a conv2d of g with w; gw gathers the same scatter pattern.
    for (int n = 0; n < N; ++n)
      for (int o = 0; o < O; ++o)
        for (int i = 0; i < H; ++i)
          for (int j = 0; j < W; ++j) {
            const std::size_t xidx = ((static_cast<std::size_t>(n) * O + o) * H + i) * W + j;
            const double xv = xn->value[xidx];
            double acc = 0.0;
            for (int c = 0; c < I; ++c)
              for (int ki = 0; ki < K; ++ki) {
                const int hi = i * stride - padding + ki;
                if (hi < 0 || hi >= Ho) continue;
                const std::size_t wbase = ((static_cast<std::size_t>(o) * I + c) * K + ki) * K;
                const std::size_t gbase = ((static_cast<std::size_t>(n) * I + c) * Ho + hi) * Wo;
                for (int kj = 0; kj < K; ++kj) {
                  const int wi = j * stride - padding + kj;
                  if (wi < 0 || wi >= Wo) continue;
                  acc += g[gbase + wi] * wn->value[wbase + kj];
                  gw[wbase + kj] += g[gbase + wi] * xv;
                }
              }
            gx[xidx] += acc;
          }
  };
  return make_op({N, I, Ho, Wo}, std::move(out), {x, w}, bp, "tconv2d");
}

Tensor dense(const Tensor& x, const Tensor& w) {
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  if (xs.size() != 2 || ws.size() != 2)
    throw std::invalid_argument("dense: expected 2-d input and weight");
  if (xs[1] != ws[0])
    throw std::invalid_argument("dense: inner dims disagree, " + shape_str(xs) +
                                " x " + shape_str(ws));
  const int N = xs[0], In = xs[1], Out = ws[1];
  const auto& xd = x.data();
  const auto& wd = w.data();
  std::vector<double> out(static_cast<std::size_t>(N) * Out, 0.0);
  for (int n = 0; n < N; ++n)
    for (int i = 0; i < In; ++i) {
      const double xv = xd[static_cast<std::size_t>(n) * In + i];
      if (xv == 0.0) continue;
      const std::size_t wbase = static_cast<std::size_t>(i) * Out;
      const std::size_t obase = static_cast<std::size_t>(n) * Out;
      for (int o = 0; o < Out; ++o) out[obase + o] += xv * wd[wbase + o];
    }

  auto xn = x.node();
  auto wn = w.node();
  auto bp = [=](const std::vector<double>& g, std::vector<std::vector<double>>& pg) {
    auto& gx = pg[0];
    auto& gw = pg[1];
    for (int n = 0; n < N; ++n)
      for (int i = 0; i < In; ++i) {
        const std::size_t xidx = static_cast<std::size_t>(n) * In + i;
        const std::size_t wbase = static_cast<std::size_t>(i) * Out;
        const std::size_t obase = static_cast<std::size_t>(n) * Out;
        double acc = 0.0;
        for (int o = 0; o < Out; ++o) {
          acc += g[obase + o] * wn->value[wbase + o];
          gw[wbase + o] += g[obase + o] * xn->value[xidx];
        }
        gx[xidx] += acc;
      }
  };
  return make_op({N, Out}, std::move(out), {x, w}, bp, "dense");
}

namespace {

Tensor unary_pointwise(const Tensor& x, const char* name,
                       const std::function<double(double)>& f,
                       const std::function<double(double)>& dfdx_of_input) {
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x.data()[i]);
  auto xn = x.node();
  auto bp = [=](const std::vector<double>& g, std::vector<std::vector<double>>& pg) {
    for (std::size_t i = 0; i < g.size(); ++i)
      pg[0][i] += g[i] * dfdx_of_input(xn->value[i]);
  };
  return make_op(x.shape(), std::move(out), {x}, bp, name);
}

}  // namespace

Tensor leaky_relu(const Tensor& x, double slope) {
  if (slope <= 0.0 || slope >= 1.0)
    throw std::invalid_argument("leaky_relu: slope must be in (0,1)");
  return unary_pointwise(
      x, "leaky_relu", [slope](double v) { return v >= 0.0 ? v : slope * v; },
      [slope](double v) { return v >= 0.0 ? 1.0 : slope; });
}

Tensor relu(const Tensor& x) {
  return unary_pointwise(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor mse(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mse");
  const std::size_t n = a.numel();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a.data()[i] - b.data()[i];
    acc += d * d;
  }
  auto an = a.node();
  auto bn = b.node();
  auto bp = [=](const std::vector<double>& g, std::vector<std::vector<double>>& pg) {
    const double s = g[0] * 2.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = an->value[i] - bn->value[i];
      pg[0][i] += s * d;
      pg[1][i] -= s * d;
    }
  };
  return make_op({1}, {acc / static_cast<double>(n)}, {a, b}, bp, "mse");
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  auto bp = [](const std::vector<double>& g, std::vector<std::vector<double>>& pg) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      pg[0][i] += g[i];
      pg[1][i] += g[i];
    }
  };
  return make_op(a.shape(), std::move(out), {a, b}, bp, "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  auto bp = [](const std::vector<double>& g, std::vector<std::vector<double>>& pg) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      pg[0][i] += g[i];
      pg[1][i] -= g[i];
    }
  };
  return make_op(a.shape(), std::move(out), {a, b}, bp, "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  auto an = a.node();
  auto bn = b.node();
  auto bp = [=](const std::vector<double>& g, std::vector<std::vector<double>>& pg) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      pg[0][i] += g[i] * bn->value[i];
      pg[1][i] += g[i] * an->value[i];
    }
  };
  return make_op(a.shape(), std::move(out), {a, b}, bp, "mul");
}

Tensor scale(const Tensor& x, double s) {
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * s;
  auto bp = [s](const std::vector<double>& g, std::vector<std::vector<double>>& pg) {
    for (std::size_t i = 0; i < g.size(); ++i) pg[0][i] += g[i] * s;
  };
  return make_op(x.shape(), std::move(out), {x}, bp, "scale");
}

Tensor add_scalar(const Tensor& x, double s) {
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] + s;
  auto bp = [](const std::vector<double>& g, std::vector<std::vector<double>>& pg) {
    for (std::size_t i = 0; i < g.size(); ++i) pg[0][i] += g[i];
  };
  return make_op(x.shape(), std::move(out), {x}, bp, "add_scalar");
}

Tensor reshape(const Tensor& x, const Shape& new_shape) {
  if (shape_numel(new_shape) != x.numel())
    throw std::invalid_argument("reshape: element count mismatch " +
                                shape_str(x.shape()) + " -> " + shape_str(new_shape));
  std::vector<double> out = x.data();
  auto bp = [](const std::vector<double>& g, std::vector<std::vector<double>>& pg) {
    for (std::size_t i = 0; i < g.size(); ++i) pg[0][i] += g[i];
  };
  return make_op(new_shape, std::move(out), {x}, bp, "reshape");
}

Tensor sum_all(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  auto bp = [](const std::vector<double>& g, std::vector<std::vector<double>>& pg) {
    for (double& p : pg[0]) p += g[0];
  };
  return make_op({1}, {acc}, {x}, bp, "sum_all");
}

Tensor row_sum(const Tensor& x) {
  const Shape& xs = x.shape();
  if (xs.size() != 2) throw std::invalid_argument("row_sum: expected 2-d tensor");
  const int N = xs[0], P = xs[1];
  std::vector<double> out(N, 0.0);
  for (int n = 0; n < N; ++n)
    for (int p = 0; p < P; ++p)
      out[n] += x.data()[static_cast<std::size_t>(n) * P + p];
  auto bp = [=](const std::vector<double>& g, std::vector<std::vector<double>>& pg) {
    for (int n = 0; n < N; ++n)
      for (int p = 0; p < P; ++p)
        pg[0][static_cast<std::size_t>(n) * P + p] += g[n];
  };
  return make_op({N}, std::move(out), {x}, bp, "row_sum");
}

Tensor sub_rowvec(const Tensor& x, const std::vector<double>& v) {
  const Shape& xs = x.shape();
  if (xs.size() != 2 || static_cast<std::size_t>(xs[1]) != v.size())
    throw std::invalid_argument("sub_rowvec: dim mismatch, rows of " +
                                shape_str(xs) + " vs vector of length " +
                                std::to_string(v.size()));
  const int N = xs[0], P = xs[1];
  std::vector<double> out(x.numel());
  for (int n = 0; n < N; ++n)
    for (int p = 0; p < P; ++p) {
      const std::size_t i = static_cast<std::size_t>(n) * P + p;
      out[i] = x.data()[i] - v[p];
    }
  auto bp = [](const std::vector<double>& g, std::vector<std::vector<double>>& pg) {
    for (std::size_t i = 0; i < g.size(); ++i) pg[0][i] += g[i];
  };
  return make_op(x.shape(), std::move(out), {x}, bp, "sub_rowvec");
}

void backward(const Tensor& loss) {
  if (!loss.valid() || loss.numel() != 1)
    throw std::invalid_argument("backward: loss must be a scalar tensor");

  // Reverse topological order by iterative DFS.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, child] = stack.back();
    if (child < node->parents.size()) {
      Node* p = node->parents[child++].get();
      if (visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  // order is now children-after-parents; walk it from the back.

  std::unordered_map<Node*, std::vector<double>> local;
  local[loss.node().get()] = {1.0};
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    auto found = local.find(node);
    if (found == local.end()) continue;  // disconnected from the loss
    const std::vector<double>& g = found->second;
    if (node->backprop) {
      // Fresh zero buffers per parent slot, merged afterwards; a node may
      // appear as several parents of one op (e.g. mul(a,a)).
      std::vector<std::vector<double>> pgs(node->parents.size());
      for (std::size_t i = 0; i < node->parents.size(); ++i)
        pgs[i].assign(node->parents[i]->value.size(), 0.0);
      node->backprop(g, pgs);
      for (std::size_t i = 0; i < node->parents.size(); ++i) {
        auto& buf = local[node->parents[i].get()];
        if (buf.empty()) {
          buf = std::move(pgs[i]);
        } else {
          for (std::size_t k = 0; k < buf.size(); ++k) buf[k] += pgs[i][k];
        }
      }
    } else if (node->requires_grad) {
      // Leaf: accumulate into the persistent gradient.
      if (node->grad.size() != node->value.size())
        node->grad.assign(node->value.size(), 0.0);
      for (std::size_t i = 0; i < g.size(); ++i) node->grad[i] += g[i];
    }
  }

  // A leaf sharing a node with interior positions is impossible (ops always
  // create fresh nodes), so every requires_grad leaf reachable from the loss
  // has been handled; unreachable leaves keep (or get) zero grads.
}

void zero_grads(NamedParams& params) {
  for (auto& [name, t] : params) t.zero_grad();
}

void adam_step(NamedParams& params, AdamState& state, double weight_decay) {
  if (state.m.empty()) {
    for (const auto& [name, t] : params) {
      state.m.emplace_back(name, std::vector<double>(t.numel(), 0.0));
      state.v.emplace_back(name, std::vector<double>(t.numel(), 0.0));
    }
  }
  if (state.m.size() != params.size())
    throw std::invalid_argument("adam_step: state tracks a different parameter set");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& [name, t] = params[pi];
    auto node = t.node();
    if (node->grad.size() != node->value.size())
      throw std::runtime_error("adam_step: missing gradient for parameter '" + name + "'");
    auto& m = state.m[pi].second;
    auto& v = state.v[pi].second;
    for (std::size_t i = 0; i < node->value.size(); ++i) {
      const double g = node->grad[i] + weight_decay * node->value[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      node->value[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace mpad::nd
