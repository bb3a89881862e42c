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

// The four networks and their parameters: encoder (theta), hash projection
// (W_h), generator (pi) and discriminator (psi).
//
// Parameters live in a BganModel. A ModelGraph binds them into a Graph for
// one forward pass; gradients are read back per parameter afterwards.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bgan/autograd.hpp"
#include "bgan/config.hpp"
#include "bgan/dataset.hpp"
#include "bgan/hashlayer.hpp"

namespace bgan {

enum class ParamGroup { Encoder, Hash, Generator, Discriminator };

std::string_view group_name(ParamGroup g) noexcept;

struct Parameter {
  std::string name;
  ParamGroup group;
  Tensor value;
};

class BganModel {
 public:
  /// Fan-in scaled uniform weights, zero biases, unit batchnorm scales.
  static BganModel init(const Architecture& arch, std::uint64_t seed);

  const Architecture& architecture() const noexcept { return arch_; }
  std::vector<Parameter>& params() noexcept { return params_; }
  const std::vector<Parameter>& params() const noexcept { return params_; }
  std::vector<BatchNormState>& batchnorm_states() noexcept { return bn_; }
  const std::vector<BatchNormState>& batchnorm_states() const noexcept { return bn_; }

  std::size_t index_of(std::string_view name) const;
  Tensor& param(std::string_view name) { return params_[index_of(name)].value; }
  const Tensor& param(std::string_view name) const { return params_[index_of(name)].value; }

  /// Flattened encoder output size (rows of W_h).
  std::size_t feature_dim() const noexcept { return arch_.encoder_features; }

  friend bool operator==(const BganModel&, const BganModel&);

 private:
  Architecture arch_;
  std::vector<Parameter> params_;
  std::vector<BatchNormState> bn_;  // one per generator batchnorm layer
};

bool operator==(const BganModel& a, const BganModel& b);

BganModel init_params(const Architecture& arch, std::uint64_t seed);

inline constexpr std::initializer_list<ParamGroup> kAllGroups = {
    ParamGroup::Encoder, ParamGroup::Hash, ParamGroup::Generator, ParamGroup::Discriminator};

struct DiscriminatorOutput {
  Var p;    // [N] probabilities
  Var phi;  // [N x C' x H' x W'] activation of the last convolution
};

class ModelGraph {
 public:
  /// Parameters of the trainable groups become graph leaves, the rest
  /// constants (gradients still flow through them to their inputs).
  /// training selects batch statistics (and running-stat updates) in
  /// batchnorm layers.
  ModelGraph(Graph& graph, BganModel& model, bool training,
             std::initializer_list<ParamGroup> trainable = kAllGroups);

  /// Uses the given variables as parameters, in model order.
  ModelGraph(Graph& graph, BganModel& model, bool training, std::vector<Var> params);

  Graph& graph() const noexcept { return *graph_; }
  BganModel& model() const noexcept { return *model_; }

  /// phi(I; theta) [N x F].
  Var features(Var images);
  /// W_h^T phi + bias [N x L].
  Var pre_activation(Var images);
  /// Relaxed codes surrogate(pre_activation, beta) in [-1, 1].
  Var encode(Var images, double beta, SurrogateKind kind);
  /// codes [N x L] -> images [N x C x H x W] in [0, 1].
  Var generate(Var codes);
  DiscriminatorOutput discriminate(Var images);

  Var param(std::size_t i) const { return vars_.at(i); }
  Var param(std::string_view name) const { return vars_.at(model_->index_of(name)); }
  Tensor grad(std::size_t i) const { return graph_->grad(vars_.at(i)); }

 private:
  Var dense(std::string_view prefix, Var x);
  Var conv(std::string_view prefix, Var x, std::size_t stride, std::size_t pad);

  Graph* graph_;
  BganModel* model_;
  std::vector<Var> vars_;
  bool training_;
};

/// Rows of an ImageSet as an [n x C x H x W] tensor.
Tensor image_batch(const ImageSet& images, std::span<const std::size_t> rows);
Tensor image_batch(const ImageSet& images);

/// Hard sign codes of every image, computed in inference mode.
CodeSet encode_codes(BganModel& model, const ImageSet& images, std::size_t batch = 64);

/// Reconstructions G(sgn(...)) of the given images, inference mode.
Tensor reconstruct(BganModel& model, const ImageSet& images, std::size_t batch = 64);

/// Writes <stem>.bin (named tensors) and <stem>.json (architecture).
void save_checkpoint(const BganModel& model, const std::filesystem::path& stem);
BganModel load_checkpoint(const std::filesystem::path& stem);

}  // namespace bgan
