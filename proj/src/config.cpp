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

#include "bgan/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bgan/error.hpp"

namespace bgan {

using nlohmann::json;

std::string_view activation_name(Activation a) noexcept {
  switch (a) {
    case Activation::App: return "app";
    case Activation::Tanh: return "tanh";
    case Activation::TwoStep: return "two_step";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "app") return Activation::App;
  if (name == "tanh") return Activation::Tanh;
  if (name == "two_step") return Activation::TwoStep;
  throw InvalidArgument("unknown activation '" + std::string(name) +
                        "' (expected app, tanh or two_step)");
}

void Architecture::validate() const {
  if (channels == 0 || height == 0 || width == 0)
    throw InvalidArgument("architecture: image extents must be >= 1");
  if (code_bits == 0) throw InvalidArgument("architecture: code_bits must be >= 1");
  if (encoder_channels.empty() || encoder_features == 0)
    throw InvalidArgument("architecture: encoder needs at least one conv block");
  if (generator_channels.empty())
    throw InvalidArgument("architecture: generator needs at least one block");
  const std::size_t factor = std::size_t{1} << generator_channels.size();
  if (height % factor != 0 || width % factor != 0)
    throw InvalidArgument("architecture: image extents must be divisible by 2^" +
                          std::to_string(generator_channels.size()) +
                          " for the generator upsampling path");
  if (discriminator_channels.empty())
    throw InvalidArgument("architecture: discriminator needs at least one conv block");
  for (auto w : encoder_channels) if (w == 0) throw InvalidArgument("architecture: zero width");
  for (auto w : generator_channels) if (w == 0) throw InvalidArgument("architecture: zero width");
  for (auto w : discriminator_channels) if (w == 0) throw InvalidArgument("architecture: zero width");
}

void RunConfig::validate() const {
  if (k1 < 1) throw InvalidArgument("config: k1 must be >= 1");
  if (beta_schedule.empty() || beta_schedule.front() != 1.0)
    throw InvalidArgument("config: beta_schedule must start at 1");
  for (std::size_t i = 1; i < beta_schedule.size(); ++i)
    if (!(beta_schedule[i] > beta_schedule[i - 1]))
      throw InvalidArgument("config: beta_schedule must be strictly increasing");
  if (!(tau > 0.0)) throw InvalidArgument("config: tau must be > 0");
  if (batch_size < 2) throw InvalidArgument("config: batch_size must be >= 2");
  if (epochs_per_stage < 1) throw InvalidArgument("config: epochs_per_stage must be >= 1");
  if (plateau_window < 1) throw InvalidArgument("config: plateau_window must be >= 1");
  if (lambda1 < 0.0 || lambda2 < 0.0) throw InvalidArgument("config: lambdas must be >= 0");
  if (!(prob_eps > 0.0 && prob_eps < 0.5)) throw InvalidArgument("config: prob_eps out of range");
  if (momentum < 0.0 || momentum >= 1.0) throw InvalidArgument("config: momentum must be in [0,1)");
  architecture.validate();
}

namespace {

json arch_json(const Architecture& a) {
  return json{{"channels", a.channels},
              {"height", a.height},
              {"width", a.width},
              {"code_bits", a.code_bits},
              {"encoder_channels", a.encoder_channels},
              {"encoder_features", a.encoder_features},
              {"hash_bias", a.hash_bias},
              {"generator_channels", a.generator_channels},
              {"generator_batchnorm", a.generator_batchnorm},
              {"discriminator_channels", a.discriminator_channels},
              {"discriminator_hidden", a.discriminator_hidden}};
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

// Every key must be one the serializer writes; typos fail loudly.
void reject_unknown(const json& j, const json& known, const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw InvalidArgument(where + ": unknown key '" + key + "'");
}

Architecture arch_from(const json& j) {
  reject_unknown(j, arch_json(Architecture{}), "architecture");
  Architecture a;
  read_opt(j, "channels", a.channels);
  read_opt(j, "height", a.height);
  read_opt(j, "width", a.width);
  read_opt(j, "code_bits", a.code_bits);
  read_opt(j, "encoder_channels", a.encoder_channels);
  read_opt(j, "encoder_features", a.encoder_features);
  read_opt(j, "hash_bias", a.hash_bias);
  read_opt(j, "generator_channels", a.generator_channels);
  read_opt(j, "generator_batchnorm", a.generator_batchnorm);
  read_opt(j, "discriminator_channels", a.discriminator_channels);
  read_opt(j, "discriminator_hidden", a.discriminator_hidden);
  return a;
}

json parse_or_throw(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

std::string architecture_to_json(const Architecture& arch) { return arch_json(arch).dump(2) + "\n"; }

Architecture architecture_from_json(std::string_view text) {
  try {
    Architecture a = arch_from(parse_or_throw(text));
    a.validate();
    return a;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("architecture: ") + e.what());
  }
}

std::string config_to_json(const RunConfig& c) {
  json j{{"k1", c.k1},
         {"k2", c.k2},
         {"code_bits", c.architecture.code_bits},
         {"lambda1", c.lambda1},
         {"lambda2", c.lambda2},
         {"beta_schedule", c.beta_schedule},
         {"activation", std::string(activation_name(c.activation))},
         {"tau", c.tau},
         {"batch_size", c.batch_size},
         {"epochs_per_stage", c.epochs_per_stage},
         {"plateau_window", c.plateau_window},
         {"plateau_threshold", c.plateau_threshold},
         {"seed", c.seed},
         {"normalize_pair_loss", c.normalize_pair_loss},
         {"prob_eps", c.prob_eps},
         {"non_saturating_generator", c.non_saturating_generator},
         {"momentum", c.momentum},
         {"architecture", arch_json(c.architecture)}};
  return j.dump(2) + "\n";
}

RunConfig config_from_json(std::string_view text) {
  const json j = parse_or_throw(text);
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
  RunConfig c;
  reject_unknown(j, json::parse(config_to_json(c)), "config");
  try {
    if (auto it = j.find("architecture"); it != j.end()) c.architecture = arch_from(*it);
    read_opt(j, "k1", c.k1);
    read_opt(j, "k2", c.k2);
    read_opt(j, "code_bits", c.architecture.code_bits);
    read_opt(j, "lambda1", c.lambda1);
    read_opt(j, "lambda2", c.lambda2);
    read_opt(j, "beta_schedule", c.beta_schedule);
    if (auto it = j.find("activation"); it != j.end())
      c.activation = parse_activation(it->get<std::string>());
    read_opt(j, "tau", c.tau);
    read_opt(j, "batch_size", c.batch_size);
    read_opt(j, "epochs_per_stage", c.epochs_per_stage);
    read_opt(j, "plateau_window", c.plateau_window);
    read_opt(j, "plateau_threshold", c.plateau_threshold);
    read_opt(j, "seed", c.seed);
    read_opt(j, "normalize_pair_loss", c.normalize_pair_loss);
    read_opt(j, "prob_eps", c.prob_eps);
    read_opt(j, "non_saturating_generator", c.non_saturating_generator);
    read_opt(j, "momentum", c.momentum);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config " + path.string());
  out << config_to_json(cfg);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace bgan
