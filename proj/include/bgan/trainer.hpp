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

// Staged min-max training.
//
// One step makes two passes over a minibatch. The first ascends the
// discriminator on the adversarial loss; the second, with the updated
// discriminator, descends the encoder and hash projection on
// l_N + lambda1 l_C and the generator on lambda1 l_C + lambda2 l_A.
// Components whose weight is zero are neither computed nor logged.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bgan/config.hpp"
#include "bgan/dataset.hpp"
#include "bgan/hashlayer.hpp"
#include "bgan/losses.hpp"
#include "bgan/model.hpp"
#include "bgan/neighborhood.hpp"
#include "bgan/random.hpp"

namespace bgan {

/// p <- p - tau g (descent) or p <- p + tau g (ascent).
void sgd_step(Tensor& param, const Tensor& grad, double tau, bool ascent = false);

/// Heavy-ball variant: v <- momentum v + g, then the plain step with v.
void sgd_momentum_step(Tensor& param, Tensor& velocity, const Tensor& grad, double tau,
                       double momentum, bool ascent = false);

/// Graph quantities of the second pass of a step. Variables of disabled
/// components are invalid and their parts stay 0.
struct StepObjectives {
  Var codes;
  Var l_n, l_mse, l_perceptual, l_c, l_a;
  /// theta and W_h descend this: l_N + lambda1 l_C.
  Var code_objective;
  /// pi descends this: lambda1 l_C + lambda2 l_A (or the non-saturating
  /// form); invalid when both weights are zero.
  Var generator_objective;
  LossParts parts;
};

StepObjectives build_objectives(ModelGraph& mg, Var images, const Tensor& similarity,
                                const RunConfig& config, double beta);

/// l_A over real and reconstructed images; psi ascends it.
Var discriminator_objective(ModelGraph& mg, Var images, const RunConfig& config, double beta);

struct TrainState {
  RunConfig config;
  BganModel model;
  ContinuationSchedule schedule;
  std::size_t epoch = 0;  // completed epochs
  Rng rng;
  std::vector<double> loss_history;  // mean total per completed epoch
  std::vector<Tensor> velocity;      // per parameter, used when momentum > 0

  double tau() const noexcept { return config.tau; }
};

/// Fresh state: parameters from init_params(architecture, seed).
TrainState make_train_state(const RunConfig& config);
/// Continue from given parameters.
TrainState make_train_state(const RunConfig& config, BganModel model);

/// One two-pass update on the images at `rows` (indices into both the
/// ImageSet and S). Returns the breakdown measured in the second pass.
LossBreakdown train_step(TrainState& state, const ImageSet& images,
                         std::span<const std::size_t> rows, const NeighborhoodMatrix& s);

struct EpochRecord {
  std::size_t epoch;
  std::size_t stage;
  double beta;
  LossBreakdown loss;
};

struct TrainOptions {
  /// When set: log.csv, stage<k>.{bin,json} checkpoints and manifest.json.
  std::optional<std::filesystem::path> out_dir;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  BganModel model;
  std::vector<EpochRecord> log;
  std::size_t stages_completed = 0;
};

/// Runs epochs of shuffled minibatches until the terminal stage plateaus or
/// its epoch budget runs out. Each stage ends on a plateau or after
/// epochs_per_stage epochs.
TrainResult train(const RunConfig& config, const ImageSet& images, const NeighborhoodMatrix& s,
                  const TrainOptions& options = {});
TrainResult train(TrainState state, const ImageSet& images, const NeighborhoodMatrix& s,
                  const TrainOptions& options = {});

std::string format_log(std::span<const EpochRecord> log);

}  // namespace bgan
