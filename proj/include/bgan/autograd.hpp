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

#pragma once

// Tape-based reverse-mode differentiation over Tensor values.
//
// A Graph records every operation in creation order, which is already a
// topological order; backward() walks the tape from the loss node down to
// index 0 and visits each reachable node exactly once. Gradients accumulate
// additively, so fan-out needs no special handling. A graph may be
// back-propagated several times (zero_grad() between passes) to obtain the
// gradients of different objectives over one forward pass.

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "bgan/tensor.hpp"

namespace bgan {

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while its graph lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Graph& graph() const { return *graph_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Arguments handed to an operation's backward function. grad_inputs[i] is
/// null when input i does not require a gradient.
struct BackwardArgs {
  std::span<const Tensor* const> inputs;
  const Tensor& output;
  const Tensor& grad_output;
  std::span<Tensor* const> grad_inputs;
};

class Graph {
 public:
  using BackwardFn = std::function<void(const BackwardArgs&)>;

  /// In checked mode every recorded value must be finite.
  explicit Graph(bool checked = true) : checked_(checked) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  /// Leaf that receives a gradient (parameters, inputs under test).
  Var leaf(Tensor value);

  Var record(std::string_view op, Tensor value, std::vector<Var> inputs,
             BackwardFn backward);

  /// Seeds d loss / d loss = 1 and accumulates into every reachable node.
  void backward(Var loss);
  void zero_grad();

  /// Gradient accumulated so far; zeros when the node was not reached.
  Tensor grad(Var v) const;
  const Tensor& value(Var v) const { return nodes_.at(v.id()).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id()).requires_grad; }

  std::size_t size() const noexcept { return nodes_.size(); }
  bool checked() const noexcept { return checked_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // empty until reached by backward
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    std::string_view op;
  };

  std::deque<Node> nodes_;
  bool checked_;
};

inline const Tensor& Var::value() const { return graph_->value(*this); }

/// Per-channel running statistics owned by a batch-normalization layer.
struct BatchNormState {
  Tensor running_mean;
  Tensor running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};

namespace ops {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);

/// a [m x k] times b [k x n].
Var matmul(Var a, Var b);
Var transpose(Var a);
/// Adds b [C] along axis 1 of x ([N x C] or [N x C x H x W]).
Var add_bias(Var x, Var b);

Var relu(Var a);
Var elu(Var a);
Var tanh_act(Var a);
Var sigmoid(Var a);
/// Clipped linear surrogate of sign: clip(beta * a, -1, 1). Backward passes
/// beta where |beta * a| <= 1 and zero outside.
Var app_act(Var a, double beta);
Var log(Var a);
/// Clamp into [lo, hi]; gradient passes only strictly inside the interval
/// or on its boundary.
Var clamp(Var a, double lo, double hi);
Var square(Var a);

Var reshape(Var a, Shape shape);
Var sum(Var a);
Var mean(Var a);

/// x [N x C x H x W], w [OC x C x k x k]; zero padding.
Var conv2d(Var x, Var w, std::size_t stride, std::size_t pad);
/// x [N x IC x H x W], w [IC x OC x k x k];
/// output extent (H - 1) * stride - 2 * pad + k.
Var conv_transpose2d(Var x, Var w, std::size_t stride, std::size_t pad);

/// Per-channel normalization over batch and spatial axes (train) or with
/// the stored running statistics (eval). Updates the running statistics in
/// train mode.
Var batchnorm(Var x, Var gamma, Var beta, BatchNormState& state, bool training);

}  // namespace ops

/// Conv output extent for a single axis.
std::size_t conv_out_extent(std::size_t in, std::size_t kernel,
                            std::size_t stride, std::size_t pad);

}  // namespace bgan
