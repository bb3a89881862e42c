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

#include "bgan/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bgan/data_io.hpp"
#include "bgan/error.hpp"
#include "bgan/random.hpp"

namespace bgan {

std::string_view group_name(ParamGroup g) noexcept {
  switch (g) {
    case ParamGroup::Encoder: return "encoder";
    case ParamGroup::Hash: return "hash";
    case ParamGroup::Generator: return "generator";
    case ParamGroup::Discriminator: return "discriminator";
  }
  return "?";
}

namespace {

constexpr std::size_t kEncoderKernel = 3;
constexpr std::size_t kGeneratorKernel = 4;
constexpr std::size_t kDiscriminatorKernel = 5;

std::size_t halvings(std::size_t extent, std::size_t times) {
  for (std::size_t i = 0; i < times; ++i) extent = conv_out_extent(extent, 3, 2, 1);
  return extent;
}

std::size_t disc_extent(std::size_t extent, std::size_t times) {
  for (std::size_t i = 0; i < times; ++i) extent = conv_out_extent(extent, 5, 2, 2);
  return extent;
}

class Builder {
 public:
  Builder(std::vector<Parameter>& params, Rng& rng) : params_(params), rng_(rng) {}

  void weight(std::string name, ParamGroup g, Shape shape, double fan_in) {
    Tensor t(std::move(shape));
    const double bound = std::sqrt(3.0 / fan_in);
    for (double& v : t.values()) v = rng_.uniform(-bound, bound);
    params_.push_back({std::move(name), g, std::move(t)});
  }
  void constant(std::string name, ParamGroup g, Shape shape, double value) {
    params_.push_back({std::move(name), g, Tensor(std::move(shape), value)});
  }
  void dense(const std::string& prefix, ParamGroup g, std::size_t in, std::size_t out,
             bool bias = true) {
    weight(prefix + ".w", g, {in, out}, static_cast<double>(in));
    if (bias) constant(prefix + ".b", g, {out}, 0.0);
  }
  void conv(const std::string& prefix, ParamGroup g, std::size_t in, std::size_t out,
            std::size_t k) {
    weight(prefix + ".w", g, {out, in, k, k}, static_cast<double>(in * k * k));
    constant(prefix + ".b", g, {out}, 0.0);
  }
  void deconv(const std::string& prefix, ParamGroup g, std::size_t in, std::size_t out,
              std::size_t k, std::size_t stride) {
    // Each output pixel sees about in * (k / stride)^2 inputs.
    weight(prefix + ".w", g, {in, out, k, k},
           static_cast<double>(in * k * k) / static_cast<double>(stride * stride));
    constant(prefix + ".b", g, {out}, 0.0);
  }

 private:
  std::vector<Parameter>& params_;
  Rng& rng_;
};

}  // namespace

BganModel BganModel::init(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  BganModel m;
  m.arch_ = arch;
  Rng rng(seed);
  Builder b(m.params_, rng);

  std::size_t in = arch.channels;
  for (std::size_t i = 0; i < arch.encoder_channels.size(); ++i) {
    b.conv("enc.conv" + std::to_string(i), ParamGroup::Encoder, in, arch.encoder_channels[i],
           kEncoderKernel);
    in = arch.encoder_channels[i];
  }
  const std::size_t n_enc = arch.encoder_channels.size();
  const std::size_t enc_flat = in * halvings(arch.height, n_enc) * halvings(arch.width, n_enc);
  b.dense("enc.fc", ParamGroup::Encoder, enc_flat, arch.encoder_features);
  b.dense("hash", ParamGroup::Hash, arch.encoder_features, arch.code_bits, arch.hash_bias);

  const std::size_t n_gen = arch.generator_channels.size();
  const std::size_t seed_h = arch.height >> n_gen, seed_w = arch.width >> n_gen;
  b.dense("gen.fc", ParamGroup::Generator, arch.code_bits,
          arch.generator_channels[0] * seed_h * seed_w);
  for (std::size_t i = 0; i < n_gen; ++i) {
    const bool last = i + 1 == n_gen;
    const std::size_t out = last ? arch.channels : arch.generator_channels[i + 1];
    b.deconv("gen.deconv" + std::to_string(i), ParamGroup::Generator, arch.generator_channels[i],
             out, kGeneratorKernel, 2);
    if (arch.generator_batchnorm && !last) {
      b.constant("gen.bn" + std::to_string(i) + ".gamma", ParamGroup::Generator, {out}, 1.0);
      b.constant("gen.bn" + std::to_string(i) + ".beta", ParamGroup::Generator, {out}, 0.0);
      m.bn_.push_back({Tensor({out}, 0.0), Tensor({out}, 1.0)});
    }
  }

  in = arch.channels;
  for (std::size_t i = 0; i < arch.discriminator_channels.size(); ++i) {
    b.conv("disc.conv" + std::to_string(i), ParamGroup::Discriminator, in,
           arch.discriminator_channels[i], kDiscriminatorKernel);
    in = arch.discriminator_channels[i];
  }
  const std::size_t n_disc = arch.discriminator_channels.size();
  std::size_t flat = in * disc_extent(arch.height, n_disc) * disc_extent(arch.width, n_disc);
  if (arch.discriminator_hidden > 0) {
    b.dense("disc.fc", ParamGroup::Discriminator, flat, arch.discriminator_hidden);
    flat = arch.discriminator_hidden;
  }
  b.dense("disc.head", ParamGroup::Discriminator, flat, 1);
  return m;
}

BganModel init_params(const Architecture& arch, std::uint64_t seed) {
  return BganModel::init(arch, seed);
}

std::size_t BganModel::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return i;
  throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
}

bool operator==(const BganModel& a, const BganModel& b) {
  if (!(a.arch_ == b.arch_) || a.params_.size() != b.params_.size() ||
      a.bn_.size() != b.bn_.size())
    return false;
  for (std::size_t i = 0; i < a.params_.size(); ++i)
    if (a.params_[i].name != b.params_[i].name || a.params_[i].group != b.params_[i].group ||
        !(a.params_[i].value == b.params_[i].value))
      return false;
  for (std::size_t i = 0; i < a.bn_.size(); ++i)
    if (!(a.bn_[i].running_mean == b.bn_[i].running_mean) ||
        !(a.bn_[i].running_var == b.bn_[i].running_var))
      return false;
  return true;
}

// -- forward ----------------------------------------------------------------

ModelGraph::ModelGraph(Graph& graph, BganModel& model, bool training,
                       std::initializer_list<ParamGroup> trainable)
    : graph_(&graph), model_(&model), training_(training) {
  vars_.reserve(model.params().size());
  for (const auto& p : model.params()) {
    const bool leaf = std::find(trainable.begin(), trainable.end(), p.group) != trainable.end();
    vars_.push_back(leaf ? graph.leaf(p.value) : graph.constant(p.value));
  }
}

ModelGraph::ModelGraph(Graph& graph, BganModel& model, bool training, std::vector<Var> params)
    : graph_(&graph), model_(&model), vars_(std::move(params)), training_(training) {
  const auto& ps = model.params();
  if (vars_.size() != ps.size())
    throw InvalidArgument("ModelGraph: " + std::to_string(vars_.size()) + " variables for " +
                          std::to_string(ps.size()) + " parameters");
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (vars_[i].shape() != ps[i].value.shape())
      throw ShapeError("ModelGraph: variable for '" + ps[i].name + "' has shape " +
                       shape_str(vars_[i].shape()) + ", expected " +
                       shape_str(ps[i].value.shape()));
}

Var ModelGraph::dense(std::string_view prefix, Var x) {
  const std::string p(prefix);
  Var y = ops::matmul(x, param(p + ".w"));
  const auto& params = model_->params();
  const std::string bias = p + ".b";
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].name == bias) return ops::add_bias(y, vars_[i]);
  return y;
}

Var ModelGraph::conv(std::string_view prefix, Var x, std::size_t stride, std::size_t pad) {
  const std::string p(prefix);
  return ops::add_bias(ops::conv2d(x, param(p + ".w"), stride, pad), param(p + ".b"));
}

Var ModelGraph::features(Var images) {
  const Architecture& a = model_->architecture();
  const Shape& s = images.shape();
  if (s.size() != 4 || s[1] != a.channels || s[2] != a.height || s[3] != a.width)
    throw ShapeError("encoder expects [N x " + std::to_string(a.channels) + " x " +
                     std::to_string(a.height) + " x " + std::to_string(a.width) + "], got " +
                     shape_str(s));
  Var h = images;
  for (std::size_t i = 0; i < a.encoder_channels.size(); ++i)
    h = ops::relu(conv("enc.conv" + std::to_string(i), h, 2, 1));
  const std::size_t n = h.shape()[0];
  h = ops::reshape(h, {n, h.value().size() / n});
  return ops::relu(dense("enc.fc", h));
}

Var ModelGraph::pre_activation(Var images) { return dense("hash", features(images)); }

Var ModelGraph::encode(Var images, double beta, SurrogateKind kind) {
  return surrogate_activation(pre_activation(images), beta, kind);
}

Var ModelGraph::generate(Var codes) {
  const Architecture& a = model_->architecture();
  const Shape& s = codes.shape();
  if (s.size() != 2 || s[1] != a.code_bits)
    throw ShapeError("generator expects [N x " + std::to_string(a.code_bits) + "] codes, got " +
                     shape_str(s));
  const std::size_t n_gen = a.generator_channels.size();
  Var h = ops::elu(dense("gen.fc", codes));
  h = ops::reshape(h, {s[0], a.generator_channels[0], a.height >> n_gen, a.width >> n_gen});
  std::size_t bn = 0;
  for (std::size_t i = 0; i < n_gen; ++i) {
    const std::string p = "gen.deconv" + std::to_string(i);
    h = ops::add_bias(ops::conv_transpose2d(h, param(p + ".w"), 2, 1), param(p + ".b"));
    if (i + 1 == n_gen) return ops::sigmoid(h);
    if (a.generator_batchnorm) {
      const std::string q = "gen.bn" + std::to_string(i);
      h = ops::batchnorm(h, param(q + ".gamma"), param(q + ".beta"),
                         model_->batchnorm_states()[bn++], training_);
    }
    h = ops::elu(h);
  }
  return h;
}

DiscriminatorOutput ModelGraph::discriminate(Var images) {
  const Architecture& a = model_->architecture();
  const Shape& s = images.shape();
  if (s.size() != 4 || s[1] != a.channels || s[2] != a.height || s[3] != a.width)
    throw ShapeError("discriminator expects [N x " + std::to_string(a.channels) + " x " +
                     std::to_string(a.height) + " x " + std::to_string(a.width) + "], got " +
                     shape_str(s));
  Var h = images;
  for (std::size_t i = 0; i < a.discriminator_channels.size(); ++i)
    h = ops::elu(conv("disc.conv" + std::to_string(i), h, 2, 2));
  const Var phi = h;
  h = ops::reshape(h, {s[0], h.value().size() / s[0]});
  if (a.discriminator_hidden > 0) h = ops::elu(dense("disc.fc", h));
  const Var p = ops::reshape(ops::sigmoid(dense("disc.head", h)), {s[0]});
  return {p, phi};
}

// -- batch helpers ----------------------------------------------------------

Tensor image_batch(const ImageSet& images, std::span<const std::size_t> rows) {
  const std::size_t per = images.image_size();
  std::vector<double> values;
  values.reserve(rows.size() * per);
  for (std::size_t r : rows) {
    if (r >= images.n()) throw InvalidArgument("image row out of range");
    const auto img = images.image(r);
    values.insert(values.end(), img.begin(), img.end());
  }
  return Tensor({rows.size(), images.channels, images.height, images.width}, std::move(values));
}

Tensor image_batch(const ImageSet& images) {
  std::vector<std::size_t> rows(images.n());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return image_batch(images, rows);
}

namespace {

template <class F>
void for_batches(std::size_t n, std::size_t batch, F f) {
  if (batch == 0) throw InvalidArgument("batch size must be >= 1");
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < n; start += batch) {
    rows.clear();
    for (std::size_t i = start; i < std::min(n, start + batch); ++i) rows.push_back(i);
    f(rows);
  }
}

}  // namespace

CodeSet encode_codes(BganModel& model, const ImageSet& images, std::size_t batch) {
  const std::size_t bits = model.architecture().code_bits;
  std::vector<double> values;
  values.reserve(images.n() * bits);
  for_batches(images.n(), batch, [&](const std::vector<std::size_t>& rows) {
    Graph g;
    ModelGraph mg(g, model, false, {});
    const Var z = mg.pre_activation(g.constant(image_batch(images, rows)));
    for (double v : z.value().values()) values.push_back(sign_value(v));
  });
  return pack_codes(images.ids, values, bits);
}

Tensor reconstruct(BganModel& model, const ImageSet& images, std::size_t batch) {
  std::vector<double> values;
  for_batches(images.n(), batch, [&](const std::vector<std::size_t>& rows) {
    Graph g;
    ModelGraph mg(g, model, false, {});
    const Var z = mg.pre_activation(g.constant(image_batch(images, rows)));
    Tensor codes = z.value();
    for (double& v : codes.values()) v = sign_value(v);
    const Var out = mg.generate(g.constant(std::move(codes)));
    values.insert(values.end(), out.value().values().begin(), out.value().values().end());
  });
  return Tensor({images.n(), images.channels, images.height, images.width}, std::move(values));
}

// -- checkpoints ------------------------------------------------------------

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

}  // namespace

void save_checkpoint(const BganModel& model, const std::filesystem::path& stem) {
  NamedTensors tensors;
  for (const auto& p : model.params()) tensors.emplace_back(p.name, p.value);
  const auto& bn = model.batchnorm_states();
  for (std::size_t i = 0; i < bn.size(); ++i) {
    tensors.emplace_back("bnstate" + std::to_string(i) + ".mean", bn[i].running_mean);
    tensors.emplace_back("bnstate" + std::to_string(i) + ".var", bn[i].running_var);
  }
  save_tensors(tensors, with_suffix(stem, ".bin"));
  const auto json_path = with_suffix(stem, ".json");
  std::ofstream out(json_path, std::ios::trunc);
  out << architecture_to_json(model.architecture());
  if (!out) throw IoError("write failed: " + json_path.string());
}

BganModel load_checkpoint(const std::filesystem::path& stem) {
  const auto json_path = with_suffix(stem, ".json");
  std::ifstream in(json_path);
  if (!in) throw IoError("cannot open " + json_path.string());
  std::stringstream text;
  text << in.rdbuf();
  BganModel model = BganModel::init(architecture_from_json(text.str()), 0);

  const NamedTensors tensors = load_tensors(with_suffix(stem, ".bin"));
  auto& params = model.params();
  auto& bn = model.batchnorm_states();
  if (tensors.size() != params.size() + 2 * bn.size())
    throw IoError(stem.string() + ": checkpoint holds " + std::to_string(tensors.size()) +
                  " tensors, architecture needs " +
                  std::to_string(params.size() + 2 * bn.size()));
  auto take = [&](std::size_t k, const std::string& name, Tensor& dst) {
    if (tensors[k].first != name || tensors[k].second.shape() != dst.shape())
      throw IoError(stem.string() + ": expected tensor '" + name + "' " +
                    shape_str(dst.shape()) + ", found '" + tensors[k].first + "' " +
                    shape_str(tensors[k].second.shape()));
    dst = tensors[k].second;
  };
  std::size_t k = 0;
  for (auto& p : params) take(k++, p.name, p.value);
  for (std::size_t i = 0; i < bn.size(); ++i) {
    take(k++, "bnstate" + std::to_string(i) + ".mean", bn[i].running_mean);
    take(k++, "bnstate" + std::to_string(i) + ".var", bn[i].running_var);
  }
  return model;
}

}  // namespace bgan
