/*
 * Copyright 2026 The bgan-hash Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "bgan/autograd.hpp"

#include <cmath>
#include <string>

#include "bgan/error.hpp"
#include "bgan/kernels.hpp"

namespace bgan {

Var Graph::constant(Tensor value) {
  if (checked_ && !value.all_finite())
    throw NumericError("non-finite constant " + shape_str(value.shape()));
  nodes_.push_back(Node{std::move(value), {}, {}, {}, false, "constant"});
  return Var(this, nodes_.size() - 1);
}

Var Graph::leaf(Tensor value) {
  if (checked_ && !value.all_finite())
    throw NumericError("non-finite leaf " + shape_str(value.shape()));
  nodes_.push_back(Node{std::move(value), {}, {}, {}, true, "leaf"});
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(std::string_view op, Tensor value, std::vector<Var> inputs,
                  BackwardFn backward) {
  if (checked_ && !value.all_finite())
    throw NumericError("non-finite output from op '" + std::string(op) + "' " +
                       shape_str(value.shape()));
  Node node;
  node.value = std::move(value);
  node.op = op;
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    if (&in.graph() != this)
      throw InvalidArgument("op '" + std::string(op) +
                            "' mixes variables from different graphs");
    node.inputs.push_back(in.id());
    node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Graph::backward(Var loss) {
  Node& root = nodes_.at(loss.id());
  if (root.value.size() != 1)
    throw ShapeError("backward() needs a scalar loss, got " +
                     shape_str(root.value.shape()));
  if (!root.requires_grad) return;
  if (root.grad.empty()) root.grad = Tensor::zeros_like(root.value);
  root.grad[0] += 1.0;

  std::vector<const Tensor*> in_values;
  std::vector<Tensor*> in_grads;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.backward || node.grad.empty()) continue;
    in_values.clear();
    in_grads.clear();
    for (std::size_t in : node.inputs) {
      Node& src = nodes_[in];
      in_values.push_back(&src.value);
      if (src.requires_grad) {
        if (src.grad.empty()) src.grad = Tensor::zeros_like(src.value);
        in_grads.push_back(&src.grad);
      } else {
        in_grads.push_back(nullptr);
      }
    }
    node.backward(BackwardArgs{in_values, node.value, node.grad, in_grads});
  }
}

void Graph::zero_grad() {
  for (Node& n : nodes_) n.grad = Tensor();
}

Tensor Graph::grad(Var v) const {
  const Node& n = nodes_.at(v.id());
  return n.grad.empty() ? Tensor::zeros_like(n.value) : n.grad;
}

std::size_t conv_out_extent(std::size_t in, std::size_t kernel,
                            std::size_t stride, std::size_t pad) {
  if (stride == 0) throw ShapeError("conv stride must be positive");
  if (in + 2 * pad < kernel)
    throw ShapeError("conv kernel " + std::to_string(kernel) +
                     " larger than padded input " + std::to_string(in + 2 * pad));
  return (in + 2 * pad - kernel) / stride + 1;
}

namespace ops {

namespace {

void require_same_shape(std::string_view op, const Var& a, const Var& b) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
}

template <class F>
Tensor map_values(const Tensor& a, F f) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

// Elementwise op whose derivative is a function of (input, output).
template <class Fwd, class Deriv>
Var unary(std::string_view name, Var a, Fwd fwd, Deriv deriv) {
  Tensor out = map_values(a.value(), fwd);
  return a.graph().record(name, std::move(out), {a},
                          [deriv](const BackwardArgs& args) {
                            const Tensor& x = *args.inputs[0];
                            Tensor& gx = *args.grad_inputs[0];
                            for (std::size_t i = 0; i < x.size(); ++i)
                              gx[i] += args.grad_output[i] * deriv(x[i], args.output[i]);
                          });
}

struct ConvGeometry {
  std::size_t channels, height, width;
  std::size_t kernel, stride, pad;
  std::size_t out_h, out_w;
  std::size_t col_rows() const { return channels * kernel * kernel; }
  std::size_t col_cols() const { return out_h * out_w; }
};

// cols[(c*k + ki)*k + kj][oy*out_w + ox] = img[c][oy*s - p + ki][ox*s - p + kj]
void im2col(const double* img, const ConvGeometry& g, double* cols) {
  const std::size_t P = g.col_cols();
  for (std::size_t c = 0; c < g.channels; ++c)
    for (std::size_t ki = 0; ki < g.kernel; ++ki)
      for (std::size_t kj = 0; kj < g.kernel; ++kj) {
        double* row = cols + ((c * g.kernel + ki) * g.kernel + kj) * P;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + ki) - static_cast<long>(g.pad);
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long ix = static_cast<long>(ox * g.stride + kj) - static_cast<long>(g.pad);
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<long>(g.height) &&
                                ix < static_cast<long>(g.width);
            row[oy * g.out_w + ox] =
                inside ? img[(c * g.height + iy) * g.width + ix] : 0.0;
          }
        }
      }
}

// Adjoint of im2col: scatter-add columns back into the image.
void col2im(const double* cols, const ConvGeometry& g, double* img) {
  const std::size_t P = g.col_cols();
  for (std::size_t c = 0; c < g.channels; ++c)
    for (std::size_t ki = 0; ki < g.kernel; ++ki)
      for (std::size_t kj = 0; kj < g.kernel; ++kj) {
        const double* row = cols + ((c * g.kernel + ki) * g.kernel + kj) * P;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + ki) - static_cast<long>(g.pad);
          if (iy < 0 || iy >= static_cast<long>(g.height)) continue;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long ix = static_cast<long>(ox * g.stride + kj) - static_cast<long>(g.pad);
            if (ix < 0 || ix >= static_cast<long>(g.width)) continue;
            img[(c * g.height + iy) * g.width + ix] += row[oy * g.out_w + ox];
          }
        }
      }
}

}  // namespace

Var add(Var a, Var b) {
  require_same_shape("add", a, b);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  return a.graph().record("add", std::move(out), {a, b}, [](const BackwardArgs& args) {
    for (Tensor* g : args.grad_inputs)
      if (g) kernels::axpy(1.0, args.grad_output.data(), g->data(), g->size());
  });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a, b);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  return a.graph().record("sub", std::move(out), {a, b}, [](const BackwardArgs& args) {
    const std::size_t n = args.grad_output.size();
    if (Tensor* g = args.grad_inputs[0]) kernels::axpy(1.0, args.grad_output.data(), g->data(), n);
    if (Tensor* g = args.grad_inputs[1]) kernels::axpy(-1.0, args.grad_output.data(), g->data(), n);
  });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a, b);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  return a.graph().record("mul", std::move(out), {a, b}, [](const BackwardArgs& args) {
    const Tensor& x = *args.inputs[0];
    const Tensor& y = *args.inputs[1];
    if (Tensor* g = args.grad_inputs[0])
      for (std::size_t i = 0; i < x.size(); ++i) (*g)[i] += args.grad_output[i] * y[i];
    if (Tensor* g = args.grad_inputs[1])
      for (std::size_t i = 0; i < x.size(); ++i) (*g)[i] += args.grad_output[i] * x[i];
  });
}

Var scale(Var a, double c) {
  return unary("scale", a, [c](double x) { return c * x; },
               [c](double, double) { return c; });
}

Var add_scalar(Var a, double c) {
  return unary("add_scalar", a, [c](double x) { return x + c; },
               [](double, double) { return 1.0; });
}

Var matmul(Var a, Var b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0])
    throw ShapeError("matmul: cannot multiply " + shape_str(sa) + " by " + shape_str(sb));
  const std::size_t m = sa[0], k = sa[1], n = sb[1];
  Tensor out(Shape{m, n});
  kernels::gemm(false, false, m, n, k, a.value().data(), b.value().data(), out.data(), false);
  return a.graph().record("matmul", std::move(out), {a, b},
                          [m, k, n](const BackwardArgs& args) {
    const double* go = args.grad_output.data();
    // dA = dC * B^T, dB = A^T * dC
    if (Tensor* ga = args.grad_inputs[0])
      kernels::gemm(false, true, m, k, n, go, args.inputs[1]->data(), ga->data(), true);
    if (Tensor* gb = args.grad_inputs[1])
      kernels::gemm(true, false, k, n, m, args.inputs[0]->data(), go, gb->data(), true);
  });
}

Var transpose(Var a) {
  const Shape& s = a.shape();
  if (s.size() != 2) throw ShapeError("transpose needs a matrix, got " + shape_str(s));
  const std::size_t r = s[0], c = s[1];
  Tensor out(Shape{c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = a.value()[i * c + j];
  return a.graph().record("transpose", std::move(out), {a}, [r, c](const BackwardArgs& args) {
    Tensor& g = *args.grad_inputs[0];
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += args.grad_output[j * r + i];
  });
}

Var add_bias(Var x, Var b) {
  const Shape& s = x.shape();
  if (s.size() < 2 || b.shape().size() != 1 || b.shape()[0] != s[1])
    throw ShapeError("add_bias: bias " + shape_str(b.shape()) + " does not match axis 1 of " +
                     shape_str(s));
  const std::size_t outer = s[0], channels = s[1];
  const std::size_t inner = shape_numel(s) / (outer * channels);
  Tensor out = x.value();
  const Tensor& bv = b.value();
  for (std::size_t n = 0; n < outer; ++n)
    for (std::size_t c = 0; c < channels; ++c) {
      double* p = out.data() + (n * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) p[i] += bv[c];
    }
  return x.graph().record("add_bias", std::move(out), {x, b},
                          [outer, channels, inner](const BackwardArgs& args) {
    if (Tensor* gx = args.grad_inputs[0])
      kernels::axpy(1.0, args.grad_output.data(), gx->data(), gx->size());
    if (Tensor* gb = args.grad_inputs[1])
      for (std::size_t n = 0; n < outer; ++n)
        for (std::size_t c = 0; c < channels; ++c) {
          const double* p = args.grad_output.data() + (n * channels + c) * inner;
          double acc = 0.0;
          for (std::size_t i = 0; i < inner; ++i) acc += p[i];
          (*gb)[c] += acc;
        }
  });
}

Var relu(Var a) {
  return unary("relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var elu(Var a) {
  return unary("elu", a, [](double x) { return x > 0.0 ? x : std::expm1(x); },
               [](double x, double y) { return x > 0.0 ? 1.0 : y + 1.0; });
}

Var tanh_act(Var a) {
  return unary("tanh", a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary("sigmoid", a,
               [](double x) {
                 if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
                 const double e = std::exp(x);
                 return e / (1.0 + e);
               },
               [](double, double y) { return y * (1.0 - y); });
}

Var app_act(Var a, double beta) {
  return unary("app", a,
               [beta](double x) {
                 const double z = beta * x;
                 return z >= 1.0 ? 1.0 : (z <= -1.0 ? -1.0 : z);
               },
               [beta](double x, double) { return std::abs(beta * x) <= 1.0 ? beta : 0.0; });
}

Var log(Var a) {
  for (double v : a.value().values())
    if (!(v > 0.0)) throw NumericError("log of non-positive value");
  return unary("log", a, [](double x) { return std::log(x); },
               [](double x, double) { return 1.0 / x; });
}

Var clamp(Var a, double lo, double hi) {
  return unary("clamp", a, [lo, hi](double x) { return x < lo ? lo : (x > hi ? hi : x); },
               [lo, hi](double x, double) { return (x < lo || x > hi) ? 0.0 : 1.0; });
}

Var square(Var a) {
  return unary("square", a, [](double x) { return x * x; },
               [](double x, double) { return 2.0 * x; });
}

Var reshape(Var a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return a.graph().record("reshape", std::move(out), {a}, [](const BackwardArgs& args) {
    Tensor& g = *args.grad_inputs[0];
    kernels::axpy(1.0, args.grad_output.data(), g.data(), g.size());
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return a.graph().record("sum", Tensor::scalar(s), {a}, [](const BackwardArgs& args) {
    Tensor& g = *args.grad_inputs[0];
    const double go = args.grad_output[0];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += go;
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean of empty tensor");
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return a.graph().record("mean", Tensor::scalar(s / static_cast<double>(n)), {a},
                          [n](const BackwardArgs& args) {
    Tensor& g = *args.grad_inputs[0];
    const double go = args.grad_output[0] / static_cast<double>(n);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += go;
  });
}

Var conv2d(Var x, Var w, std::size_t stride, std::size_t pad) {
  const Shape& sx = x.shape();
  const Shape& sw = w.shape();
  if (sx.size() != 4 || sw.size() != 4 || sw[1] != sx[1] || sw[2] != sw[3])
    throw ShapeError("conv2d: input " + shape_str(sx) + " incompatible with weight " +
                     shape_str(sw));
  const std::size_t batch = sx[0], oc = sw[0];
  ConvGeometry geo{sx[1], sx[2], sx[3], sw[2], stride, pad, 0, 0};
  geo.out_h = conv_out_extent(geo.height, geo.kernel, stride, pad);
  geo.out_w = conv_out_extent(geo.width, geo.kernel, stride, pad);
  const std::size_t rows = geo.col_rows(), P = geo.col_cols();
  const std::size_t in_stride = geo.channels * geo.height * geo.width;

  Tensor out(Shape{batch, oc, geo.out_h, geo.out_w});
  std::vector<double> cols(rows * P);
  for (std::size_t n = 0; n < batch; ++n) {
    im2col(x.value().data() + n * in_stride, geo, cols.data());
    kernels::gemm(false, false, oc, P, rows, w.value().data(), cols.data(),
                  out.data() + n * oc * P, false);
  }
  return x.graph().record("conv2d", std::move(out), {x, w},
                          [geo, batch, oc, rows, P, in_stride](const BackwardArgs& args) {
    const Tensor& xv = *args.inputs[0];
    const Tensor& wv = *args.inputs[1];
    std::vector<double> cols(rows * P);
    for (std::size_t n = 0; n < batch; ++n) {
      const double* go = args.grad_output.data() + n * oc * P;
      if (Tensor* gw = args.grad_inputs[1]) {
        im2col(xv.data() + n * in_stride, geo, cols.data());
        kernels::gemm(false, true, oc, rows, P, go, cols.data(), gw->data(), true);
      }
      if (Tensor* gx = args.grad_inputs[0]) {
        kernels::gemm(true, false, rows, P, oc, wv.data(), go, cols.data(), false);
        col2im(cols.data(), geo, gx->data() + n * in_stride);
      }
    }
  });
}

Var conv_transpose2d(Var x, Var w, std::size_t stride, std::size_t pad) {
  const Shape& sx = x.shape();
  const Shape& sw = w.shape();
  if (sx.size() != 4 || sw.size() != 4 || sw[0] != sx[1] || sw[2] != sw[3])
    throw ShapeError("conv_transpose2d: input " + shape_str(sx) +
                     " incompatible with weight " + shape_str(sw));
  if (stride == 0) throw ShapeError("conv_transpose2d stride must be positive");
  const std::size_t batch = sx[0], ic = sx[1], h = sx[2], wd = sx[3];
  const std::size_t oc = sw[1], k = sw[2];
  if ((h - 1) * stride + k < 2 * pad || (wd - 1) * stride + k < 2 * pad)
    throw ShapeError("conv_transpose2d: padding exceeds output extent");
  // Geometry of the equivalent forward convolution that maps the output back
  // onto the input grid.
  ConvGeometry geo{oc, (h - 1) * stride + k - 2 * pad, (wd - 1) * stride + k - 2 * pad,
                   k, stride, pad, h, wd};
  const std::size_t rows = geo.col_rows(), P = geo.col_cols();
  const std::size_t out_stride = oc * geo.height * geo.width;

  Tensor out(Shape{batch, oc, geo.height, geo.width});
  std::vector<double> cols(rows * P);
  for (std::size_t n = 0; n < batch; ++n) {
    kernels::gemm(true, false, rows, P, ic, w.value().data(),
                  x.value().data() + n * ic * P, cols.data(), false);
    col2im(cols.data(), geo, out.data() + n * out_stride);
  }
  return x.graph().record("conv_transpose2d", std::move(out), {x, w},
                          [geo, batch, ic, rows, P, out_stride](const BackwardArgs& args) {
    const Tensor& xv = *args.inputs[0];
    const Tensor& wv = *args.inputs[1];
    std::vector<double> cols(rows * P);
    for (std::size_t n = 0; n < batch; ++n) {
      im2col(args.grad_output.data() + n * out_stride, geo, cols.data());
      if (Tensor* gx = args.grad_inputs[0])
        kernels::gemm(false, false, ic, P, rows, wv.data(), cols.data(),
                      gx->data() + n * ic * P, true);
      if (Tensor* gw = args.grad_inputs[1])
        kernels::gemm(false, true, ic, rows, P, xv.data() + n * ic * P, cols.data(),
                      gw->data(), true);
    }
  });
}

Var batchnorm(Var x, Var gamma, Var beta, BatchNormState& state, bool training) {
  const Shape& s = x.shape();
  if (s.size() < 2) throw ShapeError("batchnorm needs [N x C ...], got " + shape_str(s));
  const std::size_t batch = s[0], channels = s[1];
  const std::size_t inner = shape_numel(s) / (batch * channels);
  if (gamma.shape() != Shape{channels} || beta.shape() != Shape{channels})
    throw ShapeError("batchnorm: affine parameters must be [" + std::to_string(channels) + "]");
  if (state.running_mean.size() != channels) {
    state.running_mean = Tensor(Shape{channels}, 0.0);
    state.running_var = Tensor(Shape{channels}, 1.0);
  }
  const std::size_t m = batch * inner;
  if (training && m < 2) throw ShapeError("batchnorm training needs at least 2 values per channel");

  const Tensor& xv = x.value();
  auto at = [&](std::size_t n, std::size_t c, std::size_t i) {
    return (n * channels + c) * inner + i;
  };
  Tensor mean_c(Shape{channels}), inv_std(Shape{channels});
  for (std::size_t c = 0; c < channels; ++c) {
    double mu, var;
    if (training) {
      double acc = 0.0;
      for (std::size_t n = 0; n < batch; ++n)
        for (std::size_t i = 0; i < inner; ++i) acc += xv[at(n, c, i)];
      mu = acc / static_cast<double>(m);
      double sq = 0.0;
      for (std::size_t n = 0; n < batch; ++n)
        for (std::size_t i = 0; i < inner; ++i) {
          const double d = xv[at(n, c, i)] - mu;
          sq += d * d;
        }
      var = sq / static_cast<double>(m);
      const double unbiased = sq / static_cast<double>(m - 1);
      state.running_mean[c] = (1.0 - state.momentum) * state.running_mean[c] + state.momentum * mu;
      state.running_var[c] = (1.0 - state.momentum) * state.running_var[c] + state.momentum * unbiased;
    } else {
      mu = state.running_mean[c];
      var = state.running_var[c];
    }
    mean_c[c] = mu;
    inv_std[c] = 1.0 / std::sqrt(var + state.eps);
  }
  Tensor out(s);
  Tensor xhat(s);
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t i = 0; i < inner; ++i) {
        const std::size_t idx = at(n, c, i);
        xhat[idx] = (xv[idx] - mean_c[c]) * inv_std[c];
        out[idx] = gamma.value()[c] * xhat[idx] + beta.value()[c];
      }
  return x.graph().record(
      training ? "batchnorm_train" : "batchnorm_eval", std::move(out), {x, gamma, beta},
      [xhat = std::move(xhat), inv_std, batch, channels, inner, m, training](const BackwardArgs& args) {
        const Tensor& go = args.grad_output;
        const Tensor& g = *args.inputs[1];
        auto at = [&](std::size_t n, std::size_t c, std::size_t i) {
          return (n * channels + c) * inner + i;
        };
        for (std::size_t c = 0; c < channels; ++c) {
          double sum_go = 0.0, sum_go_xhat = 0.0;
          for (std::size_t n = 0; n < batch; ++n)
            for (std::size_t i = 0; i < inner; ++i) {
              const std::size_t idx = at(n, c, i);
              sum_go += go[idx];
              sum_go_xhat += go[idx] * xhat[idx];
            }
          if (Tensor* gb = args.grad_inputs[2]) (*gb)[c] += sum_go;
          if (Tensor* gg = args.grad_inputs[1]) (*gg)[c] += sum_go_xhat;
          if (Tensor* gx = args.grad_inputs[0]) {
            const double md = static_cast<double>(m);
            for (std::size_t n = 0; n < batch; ++n)
              for (std::size_t i = 0; i < inner; ++i) {
                const std::size_t idx = at(n, c, i);
                if (training)
                  (*gx)[idx] += g[c] * inv_std[c] / md *
                                (md * go[idx] - sum_go - xhat[idx] * sum_go_xhat);
                else
                  (*gx)[idx] += g[c] * inv_std[c] * go[idx];
              }
          }
        }
      });
}

}  // namespace ops
}  // namespace bgan
