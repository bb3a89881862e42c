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

// Training objectives. Each loss takes graph variables and returns a scalar
// variable, so every component can be differentiated on its own.

#include <cstddef>
#include <span>
#include <string>

#include "bgan/autograd.hpp"
#include "bgan/neighborhood.hpp"

namespace bgan {

/// s_ij for every in-batch pair; rows index the item space of S.
/// [n x n] with +1/-1 off the diagonal and 0 on it.
Tensor batch_similarity(const NeighborhoodMatrix& s, std::span<const std::size_t> rows);

/// 1/2 sum over in-batch pairs i < j of ((1/L) b_i^T b_j - s_ij)^2, divided
/// by the pair count when normalize is set. codes is [n x L], similarity as
/// returned by batch_similarity.
Var neighborhood_loss(Var codes, const Tensor& similarity, bool normalize = true);

/// Mean squared difference over every element (batch, channels, pixels).
Var mse_loss(Var images, Var reconstructions);

/// Mean squared difference of discriminator feature maps.
Var perceptual_loss(Var phi_images, Var phi_reconstructions);

/// mean log p_real + mean log(1 - p_fake), probabilities clamped into
/// [eps, 1 - eps] first.
Var adversarial_loss(Var p_real, Var p_fake, double eps = 1e-7);

/// -mean log p_fake, the non-saturating generator objective.
Var non_saturating_loss(Var p_fake, double eps = 1e-7);

struct LossParts {
  double l_n = 0.0;
  double l_mse = 0.0;
  double l_perceptual = 0.0;
  double l_a = 0.0;
};

struct LossBreakdown {
  double l_n = 0.0;
  double l_mse = 0.0;
  double l_perceptual = 0.0;
  double l_c = 0.0;
  double l_a = 0.0;
  double total = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  std::string describe() const;
};

/// total = l_n + lambda1 (l_mse + l_perceptual) + lambda2 l_a. Throws
/// NumericError naming the first non-finite component.
LossBreakdown total_loss(const LossParts& parts, double lambda1, double lambda2);

/// Component-wise mean of several breakdowns (weights carried over).
LossBreakdown mean_breakdown(std::span<const LossBreakdown> items);

/// Training-log CSV.
std::string log_header();
std::string log_row(std::size_t epoch, std::size_t stage, double beta, const LossBreakdown& b);

}  // namespace bgan
