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

#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bgan/data_io.hpp"
#include "bgan/error.hpp"
#include "bgan/trainer.hpp"

using namespace bgan;

namespace {

RunConfig tiny_config() {
  RunConfig c;
  Architecture& a = c.architecture;
  a.channels = 1;
  a.height = a.width = 8;
  a.code_bits = 4;
  a.encoder_channels = {2, 3};
  a.encoder_features = 6;
  a.generator_channels = {4, 3};
  a.discriminator_channels = {2, 3, 3};
  a.discriminator_hidden = 3;
  c.k1 = 3;
  c.k2 = 2;
  c.batch_size = 8;
  c.tau = 0.05;
  c.epochs_per_stage = 3;
  c.seed = 7;
  return c;
}

struct Data {
  SyntheticDataset set;
  NeighborhoodMatrix s;
};

const Data& data() {
  static const Data d = [] {
    Data out;
    out.set = make_synthetic_dataset(3, 9, 3, {1, 8, 8});
    out.s = build_neighborhood(out.set.features, 3, 2);
    return out;
  }();
  return d;
}

bool group_equal(const BganModel& a, const BganModel& b, ParamGroup g) {
  for (std::size_t i = 0; i < a.params().size(); ++i)
    if (a.params()[i].group == g && !(a.params()[i].value == b.params()[i].value)) return false;
  return true;
}

const std::vector<std::size_t> kRows{0, 1, 2, 3, 4, 5, 6, 7};

}  // namespace

TEST_CASE("sgd fixtures") {
  Tensor p({1}, 1.0);
  sgd_step(p, Tensor({1}, 0.5), 0.1);
  CHECK(p[0] == doctest::Approx(0.95).epsilon(1e-15));
  Tensor q({1}, 1.0);
  sgd_step(q, Tensor({1}, 0.5), 0.1, true);
  CHECK(q[0] == doctest::Approx(1.05).epsilon(1e-15));
  Tensor r({3}, 2.0);
  sgd_step(r, Tensor({3}, 0.0), 0.1);
  CHECK(r == Tensor({3}, 2.0));
  CHECK_THROWS_AS(sgd_step(r, Tensor({2}), 0.1), ShapeError);

  Tensor m({1}, 1.0), v;
  sgd_momentum_step(m, v, Tensor({1}, 1.0), 0.1, 0.5);
  sgd_momentum_step(m, v, Tensor({1}, 1.0), 0.1, 0.5);
  CHECK(v[0] == 1.5);
  CHECK(m[0] == doctest::Approx(1.0 - 0.1 - 0.15).epsilon(1e-15));
}

TEST_CASE("zero learning rate leaves every parameter unchanged") {
  // A config rejects tau = 0, so the step is driven with a patched state.
  TrainState st = make_train_state(tiny_config());
  st.config.tau = 0.0;
  const BganModel before = st.model;
  train_step(st, data().set.images, kRows, data().s);
  for (std::size_t i = 0; i < before.params().size(); ++i)
    CHECK(st.model.params()[i].value == before.params()[i].value);
}

TEST_CASE("repeated discriminator ascent steps increase the adversarial loss") {
  const RunConfig c = tiny_config();
  std::size_t increased = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    BganModel m = init_params(c.architecture, seed);
    const Tensor batch = image_batch(data().set.images, kRows);
    auto objective = [&] {
      Graph g;
      ModelGraph mg(g, m, true, {});
      return discriminator_objective(mg, g.constant(batch), c, 1.0).value().item();
    };
    double before = objective();
    for (int rep = 0; rep < 5; ++rep) {
      Graph g;
      ModelGraph mg(g, m, true, {ParamGroup::Discriminator});
      g.backward(discriminator_objective(mg, g.constant(batch), c, 1.0));
      for (std::size_t i = 0; i < m.params().size(); ++i)
        if (m.params()[i].group == ParamGroup::Discriminator)
          sgd_step(m.params()[i].value, mg.grad(i), 1e-3, true);
      const double after = objective();
      increased += after > before;
      before = after;
    }
  }
  CHECK(increased == 40);
}

TEST_CASE("wiring: each group moves only along its own objective") {
  const RunConfig c = tiny_config();
  TrainState st = make_train_state(c);
  const BganModel m0 = st.model;
  const Tensor batch = image_batch(data().set.images, kRows);
  const Tensor sim = batch_similarity(data().s, kRows);

  // Reference: discriminator ascent alone.
  BganModel m1 = m0;
  {
    Graph g;
    ModelGraph mg(g, m1, true, {ParamGroup::Discriminator});
    g.backward(discriminator_objective(mg, g.constant(batch), c, 1.0));
    for (std::size_t i = 0; i < m1.params().size(); ++i)
      if (m1.params()[i].group == ParamGroup::Discriminator)
        sgd_step(m1.params()[i].value, mg.grad(i), c.tau, true);
  }
  for (ParamGroup g : {ParamGroup::Encoder, ParamGroup::Hash, ParamGroup::Generator})
    CHECK(group_equal(m0, m1, g));
  CHECK_FALSE(group_equal(m0, m1, ParamGroup::Discriminator));

  // Reference second pass against the updated discriminator.
  BganModel m2 = m1;
  {
    Graph g;
    ModelGraph mg(g, m1, true, {ParamGroup::Encoder, ParamGroup::Hash, ParamGroup::Generator});
    const StepObjectives o = build_objectives(mg, g.constant(batch), sim, c, 1.0);
    g.backward(o.code_objective);
    std::vector<Tensor> code_grads(m1.params().size());
    for (std::size_t i = 0; i < m1.params().size(); ++i) code_grads[i] = mg.grad(i);
    g.zero_grad();
    g.backward(o.generator_objective);
    for (std::size_t i = 0; i < m2.params().size(); ++i) {
      const ParamGroup grp = m2.params()[i].group;
      if (grp == ParamGroup::Generator) sgd_step(m2.params()[i].value, mg.grad(i), c.tau);
      if (grp == ParamGroup::Encoder || grp == ParamGroup::Hash)
        sgd_step(m2.params()[i].value, code_grads[i], c.tau);
    }
  }

  train_step(st, data().set.images, kRows, data().s);
  CHECK(st.model == m2);
  CHECK(group_equal(st.model, m1, ParamGroup::Discriminator));
  for (ParamGroup g : {ParamGroup::Encoder, ParamGroup::Hash, ParamGroup::Generator})
    CHECK_FALSE(group_equal(st.model, m0, g));
}

TEST_CASE("wiring: dropped components freeze the groups that only they drive") {
  RunConfig c = tiny_config();
  c.lambda1 = 0.0;
  c.lambda2 = 0.0;
  TrainState st = make_train_state(c);
  const BganModel m0 = st.model;
  const LossBreakdown b = train_step(st, data().set.images, kRows, data().s);
  CHECK(group_equal(st.model, m0, ParamGroup::Generator));
  CHECK(group_equal(st.model, m0, ParamGroup::Discriminator));
  CHECK_FALSE(group_equal(st.model, m0, ParamGroup::Encoder));
  CHECK(b.total == b.l_n);

  c.lambda1 = 0.1;
  TrainState st2 = make_train_state(c);
  train_step(st2, data().set.images, kRows, data().s);
  CHECK(group_equal(st2.model, m0, ParamGroup::Discriminator));
  CHECK_FALSE(group_equal(st2.model, m0, ParamGroup::Generator));
}

TEST_CASE("the real-image term of the adversarial loss sends no gradient to the code path") {
  RunConfig c = tiny_config();
  BganModel m = init_params(c.architecture, 2);
  const Tensor batch = image_batch(data().set.images, kRows);
  auto grads = [&](bool detach_real) {
    Graph g;
    ModelGraph mg(g, m, true);
    const Var x = g.constant(batch);
    const Var fake = mg.generate(mg.encode(x, 1.0, SurrogateKind::App));
    Var p_real = mg.discriminate(x).p;
    if (detach_real) p_real = g.constant(p_real.value());
    g.backward(adversarial_loss(p_real, mg.discriminate(fake).p));
    std::vector<Tensor> out;
    for (std::size_t i = 0; i < m.params().size(); ++i)
      if (m.params()[i].group != ParamGroup::Discriminator) out.push_back(mg.grad(i));
    return out;
  };
  const auto full = grads(false);
  const auto fake_only = grads(true);
  REQUIRE(full.size() == fake_only.size());
  for (std::size_t i = 0; i < full.size(); ++i) CHECK(full[i] == fake_only[i]);

  Graph g;
  ModelGraph mg(g, m, true);
  const Var x = g.constant(batch);
  g.backward(ops::mean(ops::log(mg.discriminate(x).p)));
  for (std::size_t i = 0; i < m.params().size(); ++i)
    if (m.params()[i].group != ParamGroup::Discriminator) {
      const Tensor grad = mg.grad(i);
      for (double v : grad.values()) CHECK(v == 0.0);
    }
}

TEST_CASE("training run: monotone beta, budget, checkpoints and manifest") {
  RunConfig c = tiny_config();
  c.plateau_threshold = 1e-300;  // only the budget ends a stage
  const auto dir = std::filesystem::temp_directory_path() / ("bgan_train_" + std::to_string(::getpid()));
  std::vector<double> betas;
  TrainOptions opt;
  opt.out_dir = dir;
  opt.on_epoch = [&](const EpochRecord& r) { betas.push_back(r.beta); };
  const TrainResult r = train(c, data().set.images, data().s, opt);
  CHECK(r.log.size() == 9);
  CHECK(r.stages_completed == 3);
  CHECK(betas == std::vector<double>{1, 1, 1, 3, 3, 3, 10, 10, 10});
  for (std::size_t i = 1; i < r.log.size(); ++i) CHECK(r.log[i].beta >= r.log[i - 1].beta);
  for (const char* f : {"log.csv", "manifest.json", "stage0.bin", "stage1.json", "stage2.bin"})
    CHECK(std::filesystem::exists(dir / f));
  std::ifstream in(dir / "log.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == format_log(r.log));
  CHECK(load_checkpoint(dir / "stage2") == r.model);
  std::filesystem::remove_all(dir);
}

TEST_CASE("training is deterministic under a fixed seed") {
  const RunConfig c = tiny_config();
  TrainResult a = train(c, data().set.images, data().s);
  TrainResult b = train(c, data().set.images, data().s);
  CHECK(format_log(a.log) == format_log(b.log));
  CHECK(a.model == b.model);
  CHECK(encode_codes(a.model, data().set.images) == encode_codes(b.model, data().set.images));
}

TEST_CASE("two_step mode equals a single-stage run at beta 1") {
  RunConfig two = tiny_config();
  two.activation = Activation::TwoStep;
  RunConfig single = tiny_config();
  single.activation = Activation::Tanh;
  single.beta_schedule = {1.0};
  const TrainResult a = train(two, data().set.images, data().s);
  const TrainResult b = train(single, data().set.images, data().s);
  CHECK(a.stages_completed == 1);
  for (const auto& r : a.log) {
    CHECK(r.beta == 1.0);
    CHECK(r.stage == 0);
  }
  CHECK(format_log(a.log) == format_log(b.log));
  CHECK(a.model == b.model);
}

TEST_CASE("disabled components log exact zeros") {
  RunConfig c = tiny_config();
  c.lambda1 = 0.0;
  c.epochs_per_stage = 1;
  for (const auto& r : train(c, data().set.images, data().s).log) {
    CHECK(r.loss.l_mse == 0.0);
    CHECK(r.loss.l_perceptual == 0.0);
    CHECK(r.loss.l_c == 0.0);
    CHECK(r.loss.l_a != 0.0);
  }
  c.lambda1 = 0.1;
  c.lambda2 = 0.0;
  for (const auto& r : train(c, data().set.images, data().s).log) {
    CHECK(r.loss.l_a == 0.0);
    CHECK(r.loss.l_c > 0.0);
  }
}

TEST_CASE("input validation") {
  const RunConfig c = tiny_config();
  TrainState st = make_train_state(c);
  const std::vector<std::size_t> one{0};
  CHECK_THROWS_AS(train_step(st, data().set.images, one, data().s), InvalidArgument);
  const NeighborhoodMatrix small(3, {});
  CHECK_THROWS_AS(train(c, data().set.images, small), InvalidArgument);
  RunConfig other = c;
  other.architecture.code_bits = 5;
  CHECK_THROWS_AS(make_train_state(c, init_params(other.architecture, 0)), InvalidArgument);
}
