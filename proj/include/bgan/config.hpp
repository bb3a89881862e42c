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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace bgan {

enum class Activation { App, Tanh, TwoStep };

std::string_view activation_name(Activation a) noexcept;
Activation parse_activation(std::string_view name);

/// Network geometry; every width is configurable.
struct Architecture {
  std::size_t channels = 1;
  std::size_t height = 16;
  std::size_t width = 16;
  std::size_t code_bits = 12;

  // Encoder: one 3x3 stride-2 relu conv per entry, then a relu dense layer.
  std::vector<std::size_t> encoder_channels{8, 16};
  std::size_t encoder_features = 64;
  bool hash_bias = true;

  // Generator: dense code -> channels[0] x s x s, then one 4x4 stride-2
  // transposed conv per entry (the last one emits the image channels).
  std::vector<std::size_t> generator_channels{32, 16, 8};
  bool generator_batchnorm = false;

  // Discriminator: one 5x5 stride-2 elu conv per entry, optional hidden
  // dense layer, sigmoid head.
  std::vector<std::size_t> discriminator_channels{8, 16, 32};
  std::size_t discriminator_hidden = 32;

  void validate() const;
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Everything a training run depends on.
struct RunConfig {
  std::size_t k1 = 20;
  std::size_t k2 = 30;
  double lambda1 = 0.1;
  double lambda2 = 0.1;
  std::vector<double> beta_schedule{1.0, 3.0, 10.0};
  Activation activation = Activation::App;
  double tau = 0.01;
  std::size_t batch_size = 32;
  std::size_t epochs_per_stage = 50;
  std::size_t plateau_window = 3;
  double plateau_threshold = 1e-3;
  std::uint64_t seed = 0;

  bool normalize_pair_loss = true;
  double prob_eps = 1e-7;
  // Extensions, off by default.
  bool non_saturating_generator = false;
  double momentum = 0.0;

  Architecture architecture;

  std::size_t code_bits() const noexcept { return architecture.code_bits; }
  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& cfg, const std::filesystem::path& path);

std::string architecture_to_json(const Architecture& arch);
Architecture architecture_from_json(std::string_view text);

}  // namespace bgan
