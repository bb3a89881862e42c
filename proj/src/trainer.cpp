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

#include "bgan/trainer.hpp"

#include <fstream>

#include <json.hpp>

#include "bgan/error.hpp"
#include "bgan/version.hpp"

namespace bgan {

void sgd_step(Tensor& param, const Tensor& grad, double tau, bool ascent) {
  if (param.shape() != grad.shape())
    throw ShapeError("sgd_step: parameter " + shape_str(param.shape()) + " vs gradient " +
                     shape_str(grad.shape()));
  const double step = ascent ? tau : -tau;
  for (std::size_t i = 0; i < param.size(); ++i) param[i] += step * grad[i];
}

void sgd_momentum_step(Tensor& param, Tensor& velocity, const Tensor& grad, double tau,
                       double momentum, bool ascent) {
  if (velocity.shape() != grad.shape()) velocity = Tensor::zeros_like(grad);
  for (std::size_t i = 0; i < velocity.size(); ++i) velocity[i] = momentum * velocity[i] + grad[i];
  sgd_step(param, velocity, tau, ascent);
}

TrainState make_train_state(const RunConfig& config) {
  return make_train_state(config, init_params(config.architecture, config.seed));
}

TrainState make_train_state(const RunConfig& config, BganModel model) {
  config.validate();
  if (!(model.architecture() == config.architecture))
    throw InvalidArgument("model architecture does not match the run config");
  // The shuffling stream is decorrelated from the init stream of the same seed.
  TrainState state{config, std::move(model), ContinuationSchedule::from_config(config), 0,
                   Rng(config.seed ^ 0x9e3779b97f4a7c15ULL), {}, {}};
  state.velocity.resize(state.model.params().size());
  return state;
}

namespace {

void step(TrainState& st, std::size_t i, const Tensor& grad, bool ascent) {
  Tensor& p = st.model.params()[i].value;
  if (st.config.momentum > 0.0)
    sgd_momentum_step(p, st.velocity[i], grad, st.config.tau, st.config.momentum, ascent);
  else
    sgd_step(p, grad, st.config.tau, ascent);
}

void apply(TrainState& st, ModelGraph& mg, ParamGroup group, bool ascent) {
  const auto& params = st.model.params();
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].group == group) step(st, i, mg.grad(i), ascent);
}

}  // namespace

StepObjectives build_objectives(ModelGraph& mg, Var images, const Tensor& similarity,
                                const RunConfig& cfg, double beta) {
  const bool use_content = cfg.lambda1 != 0.0;
  const bool use_adversarial = cfg.lambda2 != 0.0;
  StepObjectives o;
  o.codes = mg.encode(images, beta, surrogate_for(cfg.activation));
  o.l_n = neighborhood_loss(o.codes, similarity, cfg.normalize_pair_loss);
  o.parts.l_n = o.l_n.value().item();
  o.code_objective = o.l_n;
  if (!use_content && !use_adversarial) return o;

  const Var fake = mg.generate(o.codes);
  if (use_content) {
    o.l_mse = mse_loss(images, fake);
    o.l_perceptual = perceptual_loss(mg.discriminate(images).phi, mg.discriminate(fake).phi);
    o.l_c = ops::add(o.l_mse, o.l_perceptual);
    o.parts.l_mse = o.l_mse.value().item();
    o.parts.l_perceptual = o.l_perceptual.value().item();
    o.code_objective = ops::add(o.l_n, ops::scale(o.l_c, cfg.lambda1));
    o.generator_objective = ops::scale(o.l_c, cfg.lambda1);
  }
  if (use_adversarial) {
    const Var p_fake = mg.discriminate(fake).p;
    o.l_a = adversarial_loss(mg.discriminate(images).p, p_fake, cfg.prob_eps);
    o.parts.l_a = o.l_a.value().item();
    const Var adv = ops::scale(
        cfg.non_saturating_generator ? non_saturating_loss(p_fake, cfg.prob_eps) : o.l_a,
        cfg.lambda2);
    o.generator_objective =
        o.generator_objective.valid() ? ops::add(o.generator_objective, adv) : adv;
  }
  return o;
}

Var discriminator_objective(ModelGraph& mg, Var images, const RunConfig& cfg, double beta) {
  const Var fake = mg.generate(mg.encode(images, beta, surrogate_for(cfg.activation)));
  return adversarial_loss(mg.discriminate(images).p, mg.discriminate(fake).p, cfg.prob_eps);
}

LossBreakdown train_step(TrainState& st, const ImageSet& images,
                         std::span<const std::size_t> rows, const NeighborhoodMatrix& s) {
  if (rows.size() < 2) throw InvalidArgument("train_step needs a batch of at least 2 items");
  const RunConfig& cfg = st.config;
  const double beta = st.schedule.beta();
  const Tensor batch = image_batch(images, rows);

  try {
    // Pass 1: discriminator ascent on l_A; other groups are constants.
    if (cfg.lambda2 != 0.0) {
      Graph g;
      ModelGraph mg(g, st.model, true, {ParamGroup::Discriminator});
      g.backward(discriminator_objective(mg, g.constant(batch), cfg, beta));
      apply(st, mg, ParamGroup::Discriminator, true);
    }

    // Pass 2: fresh forward with the updated discriminator.
    Graph g;
    ModelGraph mg(g, st.model, true,
                  {ParamGroup::Encoder, ParamGroup::Hash, ParamGroup::Generator});
    const StepObjectives o =
        build_objectives(mg, g.constant(batch), batch_similarity(s, rows), cfg, beta);
    const LossBreakdown breakdown = total_loss(o.parts, cfg.lambda1, cfg.lambda2);

    g.backward(o.code_objective);
    std::vector<std::pair<std::size_t, Tensor>> code_grads;
    const auto& params = st.model.params();
    for (std::size_t i = 0; i < params.size(); ++i)
      if (params[i].group == ParamGroup::Encoder || params[i].group == ParamGroup::Hash)
        code_grads.emplace_back(i, mg.grad(i));

    if (o.generator_objective.valid()) {
      g.zero_grad();
      g.backward(o.generator_objective);
      apply(st, mg, ParamGroup::Generator, false);
    }
    for (auto& [i, grad] : code_grads) step(st, i, grad, false);
    return breakdown;
  } catch (const NumericError& e) {
    throw NumericError("train step at epoch " + std::to_string(st.epoch) + ", stage " +
                       std::to_string(st.schedule.stage()) + " (beta " +
                       std::to_string(beta) + "): " + e.what());
  }
}

std::string format_log(std::span<const EpochRecord> log) {
  std::string out = log_header();
  for (const auto& r : log) out += log_row(r.epoch, r.stage, r.beta, r.loss);
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void write_manifest(const std::filesystem::path& dir, const TrainState& st,
                    const TrainResult& result, const ImageSet& images,
                    const NeighborhoodMatrix& s) {
  nlohmann::json stages = nlohmann::json::array();
  for (std::size_t k = 0; k < result.stages_completed; ++k)
    stages.push_back({{"stage", k},
                      {"beta", st.schedule.betas()[k]},
                      {"checkpoint", "stage" + std::to_string(k)}});
  const nlohmann::json manifest = {
      {"tool", "bgan-hash"},
      {"version", kVersionString},
      {"seed", st.config.seed},
      {"config", nlohmann::json::parse(config_to_json(st.config))},
      {"items", images.n()},
      {"positive_pairs", s.positive_pair_count()},
      {"epochs", result.log.size()},
      {"stages", stages},
      {"finished", st.schedule.finished()},
      {"log", "log.csv"}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace

TrainResult train(const RunConfig& config, const ImageSet& images, const NeighborhoodMatrix& s,
                  const TrainOptions& options) {
  return train(make_train_state(config), images, s, options);
}

TrainResult train(TrainState st, const ImageSet& images, const NeighborhoodMatrix& s,
                  const TrainOptions& options) {
  images.validate();
  if (s.n() != images.n())
    throw InvalidArgument("neighborhood covers " + std::to_string(s.n()) + " items, images " +
                          std::to_string(images.n()));
  const Architecture& a = st.config.architecture;
  if (images.channels != a.channels || images.height != a.height || images.width != a.width)
    throw ShapeError("images are " + std::to_string(images.channels) + "x" +
                     std::to_string(images.height) + "x" + std::to_string(images.width) +
                     ", architecture expects " + std::to_string(a.channels) + "x" +
                     std::to_string(a.height) + "x" + std::to_string(a.width));
  if (images.n() < 2) throw InvalidArgument("training needs at least 2 items");
  if (options.out_dir) std::filesystem::create_directories(*options.out_dir);

  TrainResult result{st.model, {}, 0};
  std::vector<std::size_t> order(images.n());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t bs = std::min(st.config.batch_size, images.n());

  std::string log_text = log_header();
  while (!st.schedule.finished()) {
    st.rng.shuffle(order.begin(), order.end());
    std::vector<LossBreakdown> steps;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      // A trailing batch of one item has no pairs; it is dropped this epoch.
      if (end - start < 2) break;
      steps.push_back(train_step(st, images, std::span(order).subspan(start, end - start), s));
    }
    const EpochRecord rec{st.epoch, st.schedule.stage(), st.schedule.beta(),
                          mean_breakdown(steps)};
    result.log.push_back(rec);
    log_text += log_row(rec.epoch, rec.stage, rec.beta, rec.loss);
    if (options.on_epoch) options.on_epoch(rec);
    st.loss_history.push_back(rec.loss.total);
    ++st.epoch;

    const std::size_t stage = st.schedule.stage();
    const bool budget_spent = st.epoch - st.schedule.stage_start_epoch() >= st.config.epochs_per_stage;
    st.schedule = advance_stage(st.schedule, st.loss_history, budget_spent);
    if (st.schedule.stage() != stage || st.schedule.finished()) {
      ++result.stages_completed;
      if (options.out_dir) save_checkpoint(st.model, *options.out_dir / ("stage" + std::to_string(stage)));
    }
  }
  result.model = st.model;
  if (options.out_dir) {
    write_text(*options.out_dir / "log.csv", log_text);
    write_manifest(*options.out_dir, st, result, images, s);
  }
  return result;
}

}  // namespace bgan
