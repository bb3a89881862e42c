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

#include "gradient_suite.hpp"

#include <cmath>
#include <functional>

#include "bgan/hashlayer.hpp"
#include "bgan/losses.hpp"
#include "bgan/model.hpp"
#include "bgan/trainer.hpp"
#include "gradcheck.hpp"

namespace bgan::testing {

namespace {

using ops::add;
using ops::mul;
using ops::sum;

// Weight an op's output by a random constant so every grad_output entry
// differs.
Var weighted(Graph& g, Var out, Rng& rng) {
  return sum(mul(out, g.constant(random_tensor(rng, out.shape()))));
}

struct Instance {
  std::vector<Tensor> inputs;
  ScalarFn f;
  std::vector<std::size_t> wrt{};
  GradCheckOptions options{};
};

using Maker = std::function<Instance(Rng&)>;

// Unary op on inputs kept away from `kinks` by at least 1e-3.
Maker unary_case(std::function<Var(Var)> op, double lo, double hi,
                 std::vector<double> kinks = {}) {
  return [op, lo, hi, kinks](Rng& rng) {
    const Shape shape{2 + rng.below(3), 1 + rng.below(4)};
    Tensor x(shape);
    for (double& v : x.values()) {
      bool near;
      do {
        v = rng.uniform(lo, hi);
        near = false;
        for (double k : kinks) near = near || std::abs(v - k) < 1e-3;
      } while (near);
    }
    const std::uint64_t wseed = rng.next();
    return Instance{{x}, [op, wseed](Graph& g, std::span<const Var> in) {
                      Rng w(wseed);
                      return weighted(g, op(in[0]), w);
                    }};
  };
}

Maker binary_case(std::function<Var(Var, Var)> op) {
  return [op](Rng& rng) {
    const Shape shape{1 + rng.below(4), 1 + rng.below(4)};
    const std::uint64_t wseed = rng.next();
    return Instance{{random_tensor(rng, shape), random_tensor(rng, shape)},
                    [op, wseed](Graph& g, std::span<const Var> in) {
                      Rng w(wseed);
                      return weighted(g, op(in[0], in[1]), w);
                    }};
  };
}

Architecture tiny_arch(Rng& rng, bool batchnorm) {
  Architecture a;
  a.channels = 1 + rng.below(2);
  a.height = 8;
  a.width = 8;
  a.code_bits = 4;
  a.encoder_channels = {2, 3};
  a.encoder_features = 5;
  a.generator_channels = {4, 3};
  a.generator_batchnorm = batchnorm;
  a.discriminator_channels = {2, 3, 3};
  a.discriminator_hidden = 3;
  return a;
}

std::vector<std::size_t> group_indices(const BganModel& m, std::initializer_list<ParamGroup> gs) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m.params().size(); ++i)
    for (ParamGroup g : gs)
      if (m.params()[i].group == g) out.push_back(i);
  return out;
}

// Model parameters as the first inputs, followed by `extra`.
Instance model_instance(std::shared_ptr<BganModel> model, std::vector<Tensor> extra, bool training,
                        std::function<Var(ModelGraph&, std::span<const Var>)> body,
                        std::vector<std::size_t> wrt) {
  Instance inst;
  for (const auto& p : model->params()) inst.inputs.push_back(p.value);
  const std::size_t np = inst.inputs.size();
  for (auto& t : extra) inst.inputs.push_back(std::move(t));
  inst.f = [model, np, training, body](Graph& g, std::span<const Var> in) {
    ModelGraph mg(g, *model, training, std::vector<Var>(in.begin(), in.begin() + np));
    return body(mg, in.subspan(np));
  };
  inst.wrt = std::move(wrt);
  inst.options.max_coords = 6;
  return inst;
}

Tensor random_images(Rng& rng, const Architecture& a, std::size_t n) {
  return random_tensor(rng, {n, a.channels, a.height, a.width}, 0.0, 1.0);
}

Tensor random_similarity(Rng& rng, std::size_t n) {
  Tensor s({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) s[i * n + j] = s[j * n + i] = (rng.next() & 1) ? 1 : -1;
  return s;
}

/// Perturbs parameters so the discriminator head and biases are not at
/// their zero init.
std::shared_ptr<BganModel> random_model(Rng& rng, bool batchnorm) {
  auto m = std::make_shared<BganModel>(init_params(tiny_arch(rng, batchnorm), rng.next()));
  for (auto& p : m->params())
    for (double& v : p.value.values()) v += rng.uniform(-0.2, 0.2);
  return m;
}

std::vector<std::pair<std::string, Maker>> cases() {
  std::vector<std::pair<std::string, Maker>> c;
  c.emplace_back("add", binary_case([](Var a, Var b) { return ops::add(a, b); }));
  c.emplace_back("sub", binary_case([](Var a, Var b) { return ops::sub(a, b); }));
  c.emplace_back("mul", binary_case([](Var a, Var b) { return ops::mul(a, b); }));
  c.emplace_back("fan_out", binary_case([](Var a, Var) { return ops::mul(a, ops::add(a, a)); }));
  c.emplace_back("scale", unary_case([](Var a) { return ops::scale(a, -1.7); }, -2, 2));
  c.emplace_back("add_scalar", unary_case([](Var a) { return ops::add_scalar(a, 0.3); }, -2, 2));
  c.emplace_back("relu", unary_case([](Var a) { return ops::relu(a); }, -2, 2, {0.0}));
  c.emplace_back("elu", unary_case([](Var a) { return ops::elu(a); }, -2, 2));
  c.emplace_back("tanh", unary_case([](Var a) { return ops::tanh_act(a); }, -2, 2));
  c.emplace_back("sigmoid", unary_case([](Var a) { return ops::sigmoid(a); }, -4, 4));
  c.emplace_back("app_beta1", unary_case([](Var a) { return ops::app_act(a, 1.0); }, -2, 2, {-1, 1}));
  c.emplace_back("app_beta3",
                 unary_case([](Var a) { return ops::app_act(a, 3.0); }, -1, 1, {-1 / 3.0, 1 / 3.0}));
  c.emplace_back("log", unary_case([](Var a) { return ops::log(a); }, 0.2, 3));
  c.emplace_back("clamp", unary_case([](Var a) { return ops::clamp(a, -0.5, 0.7); }, -1, 1, {-0.5, 0.7}));
  c.emplace_back("square", unary_case([](Var a) { return ops::square(a); }, -2, 2));
  c.emplace_back("transpose", unary_case([](Var a) { return ops::transpose(a); }, -2, 2));
  c.emplace_back("reshape", unary_case([](Var a) {
                   return ops::reshape(a, {a.value().size()});
                 }, -2, 2));
  c.emplace_back("sum", unary_case([](Var a) { return ops::scale(ops::sum(a), 1.0); }, -2, 2));
  c.emplace_back("mean", unary_case([](Var a) { return ops::mean(ops::square(a)); }, -2, 2));
  c.emplace_back("matmul", [](Rng& rng) {
    const std::size_t m = 1 + rng.below(4), k = 1 + rng.below(4), n = 1 + rng.below(4);
    const std::uint64_t wseed = rng.next();
    return Instance{{random_tensor(rng, {m, k}), random_tensor(rng, {k, n})},
                    [wseed](Graph& g, std::span<const Var> in) {
                      Rng w(wseed);
                      return weighted(g, ops::matmul(in[0], in[1]), w);
                    }};
  });
  c.emplace_back("add_bias", [](Rng& rng) {
    const std::size_t n = 1 + rng.below(3), ch = 1 + rng.below(3);
    const bool four_d = rng.next() & 1;
    const Shape xs = four_d ? Shape{n, ch, 2, 3} : Shape{n, ch};
    const std::uint64_t wseed = rng.next();
    return Instance{{random_tensor(rng, xs), random_tensor(rng, {ch})},
                    [wseed](Graph& g, std::span<const Var> in) {
                      Rng w(wseed);
                      return weighted(g, ops::add_bias(in[0], in[1]), w);
                    }};
  });
  c.emplace_back("conv2d", [](Rng& rng) {
    const std::size_t n = 1 + rng.below(2), ic = 1 + rng.below(3), oc = 1 + rng.below(3);
    const std::size_t k = 1 + 2 * rng.below(3), stride = 1 + rng.below(2), pad = rng.below(k / 2 + 2);
    const std::size_t h = k + rng.below(4), w = k + rng.below(4);
    const std::uint64_t wseed = rng.next();
    return Instance{{random_tensor(rng, {n, ic, h, w}), random_tensor(rng, {oc, ic, k, k})},
                    [wseed, stride, pad](Graph& g, std::span<const Var> in) {
                      Rng wr(wseed);
                      return weighted(g, ops::conv2d(in[0], in[1], stride, pad), wr);
                    }};
  });
  c.emplace_back("conv_transpose2d", [](Rng& rng) {
    const std::size_t n = 1 + rng.below(2), ic = 1 + rng.below(3), oc = 1 + rng.below(3);
    const std::size_t k = 2 + rng.below(4), stride = 1 + rng.below(2);
    const std::size_t pad = rng.below((k + 1) / 2);
    const std::size_t h = 1 + rng.below(4), w = 1 + rng.below(4);
    const std::uint64_t wseed = rng.next();
    return Instance{{random_tensor(rng, {n, ic, h, w}), random_tensor(rng, {ic, oc, k, k})},
                    [wseed, stride, pad](Graph& g, std::span<const Var> in) {
                      Rng wr(wseed);
                      return weighted(g, ops::conv_transpose2d(in[0], in[1], stride, pad), wr);
                    }};
  });
  for (bool training : {true, false}) {
    c.emplace_back(training ? "batchnorm_train" : "batchnorm_eval", [training](Rng& rng) {
      const std::size_t n = 2 + rng.below(3), ch = 1 + rng.below(3);
      const Shape xs = (rng.next() & 1) ? Shape{n, ch, 2, 2} : Shape{n, ch};
      BatchNormState init;
      init.running_mean = random_tensor(rng, {ch});
      init.running_var = random_tensor(rng, {ch}, 0.5, 2.0);
      const std::uint64_t wseed = rng.next();
      return Instance{{random_tensor(rng, xs, -2, 2), random_tensor(rng, {ch}, 0.5, 1.5),
                       random_tensor(rng, {ch})},
                      [wseed, init, training](Graph& g, std::span<const Var> in) {
                        BatchNormState st = init;
                        Rng wr(wseed);
                        return weighted(g, ops::batchnorm(in[0], in[1], in[2], st, training), wr);
                      }};
    });
  }

  // Composites over tiny networks.
  for (SurrogateKind kind : {SurrogateKind::App, SurrogateKind::Tanh}) {
    c.emplace_back(kind == SurrogateKind::App ? "encoder_app" : "encoder_tanh",
                   [kind](Rng& rng) {
      auto m = random_model(rng, false);
      const std::size_t n = 2 + rng.below(2);
      const std::uint64_t wseed = rng.next();
      auto wrt = group_indices(*m, {ParamGroup::Encoder, ParamGroup::Hash});
      wrt.push_back(m->params().size());
      return model_instance(m, {random_images(rng, m->architecture(), n)}, true,
                            [wseed, kind](ModelGraph& mg, std::span<const Var> x) {
                              Rng w(wseed);
                              return weighted(mg.graph(), mg.encode(x[0], 1.5, kind), w);
                            },
                            wrt);
    });
  }
  for (bool bn : {false, true}) {
    c.emplace_back(bn ? "generator_batchnorm" : "generator", [bn](Rng& rng) {
      auto m = random_model(rng, bn);
      const std::size_t n = 2 + rng.below(2);
      const Architecture& a = m->architecture();
      auto wrt = group_indices(*m, {ParamGroup::Generator});
      wrt.push_back(m->params().size());
      return model_instance(m, {random_tensor(rng, {n, a.code_bits}), random_images(rng, a, n)},
                            true,
                            [](ModelGraph& mg, std::span<const Var> x) {
                              return mse_loss(mg.generate(x[0]), x[1]);
                            },
                            wrt);
    });
  }
  c.emplace_back("discriminator", [](Rng& rng) {
    auto m = random_model(rng, false);
    const std::size_t n = 2 + rng.below(2);
    const std::uint64_t wseed = rng.next();
    auto wrt = group_indices(*m, {ParamGroup::Discriminator});
    wrt.push_back(m->params().size());
    return model_instance(m, {random_images(rng, m->architecture(), n)}, true,
                          [wseed](ModelGraph& mg, std::span<const Var> x) {
                            Rng w(wseed);
                            const DiscriminatorOutput d = mg.discriminate(x[0]);
                            return ops::add(weighted(mg.graph(), d.p, w),
                                            weighted(mg.graph(), d.phi, w));
                          },
                          wrt);
  });

  // Losses.
  c.emplace_back("neighborhood_loss", [](Rng& rng) {
    const std::size_t n = 2 + rng.below(4), bits = 1 + rng.below(6);
    const Tensor sim = random_similarity(rng, n);
    const bool normalize = rng.next() & 1;
    return Instance{{random_tensor(rng, {n, bits})},
                    [sim, normalize](Graph&, std::span<const Var> in) {
                      return neighborhood_loss(in[0], sim, normalize);
                    }};
  });
  c.emplace_back("mse_loss", [](Rng& rng) {
    const Shape s{1 + rng.below(3), 1, 1 + rng.below(4), 1 + rng.below(4)};
    return Instance{{random_tensor(rng, s, 0, 1), random_tensor(rng, s, 0, 1)},
                    [](Graph&, std::span<const Var> in) { return mse_loss(in[0], in[1]); }};
  });
  c.emplace_back("perceptual_loss", [](Rng& rng) {
    auto m = random_model(rng, false);
    const std::size_t n = 2 + rng.below(2);
    const Architecture& a = m->architecture();
    // Gradient with respect to the reconstruction, through the discriminator.
    return model_instance(m, {random_images(rng, a, n), random_images(rng, a, n)}, true,
                          [](ModelGraph& mg, std::span<const Var> x) {
                            return perceptual_loss(mg.discriminate(x[0]).phi,
                                                   mg.discriminate(x[1]).phi);
                          },
                          {m->params().size() + 1});
  });
  c.emplace_back("adversarial_loss", [](Rng& rng) {
    const std::size_t n = 1 + rng.below(5);
    return Instance{{random_tensor(rng, {n}, 0.05, 0.95), random_tensor(rng, {n}, 0.05, 0.95)},
                    [](Graph&, std::span<const Var> in) {
                      return adversarial_loss(in[0], in[1], 1e-7);
                    }};
  });
  c.emplace_back("non_saturating_loss", [](Rng& rng) {
    return Instance{{random_tensor(rng, {1 + rng.below(5)}, 0.05, 0.95)},
                    [](Graph&, std::span<const Var> in) { return non_saturating_loss(in[0]); }};
  });

  // The training objectives, each against the group that follows it.
  struct Objective {
    const char* name;
    std::initializer_list<ParamGroup> groups;
    int which;  // 0 code, 1 generator, 2 discriminator
  };
  static const Objective objectives[] = {
      {"objective_theta_wh", {ParamGroup::Encoder, ParamGroup::Hash}, 0},
      {"objective_pi", {ParamGroup::Generator}, 1},
      {"objective_psi", {ParamGroup::Discriminator}, 2}};
  for (const Objective& obj : objectives) {
    c.emplace_back(obj.name, [obj](Rng& rng) {
      auto m = random_model(rng, false);
      const std::size_t n = 2 + rng.below(2);
      RunConfig cfg;
      cfg.architecture = m->architecture();
      cfg.activation = (rng.next() & 1) ? Activation::App : Activation::Tanh;
      cfg.lambda1 = rng.uniform(0.05, 1.0);
      cfg.lambda2 = rng.uniform(0.05, 1.0);
      cfg.non_saturating_generator = obj.which == 1 && (rng.next() & 1);
      const Tensor sim = random_similarity(rng, n);
      const double beta = (rng.next() & 1) ? 1.0 : 3.0;
      return model_instance(m, {random_images(rng, m->architecture(), n)}, true,
                            [obj, cfg, sim, beta](ModelGraph& mg, std::span<const Var> x) {
                              if (obj.which == 2) return discriminator_objective(mg, x[0], cfg, beta);
                              const StepObjectives o = build_objectives(mg, x[0], sim, cfg, beta);
                              return obj.which == 0 ? o.code_objective : o.generator_objective;
                            },
                            group_indices(*m, obj.groups));
    });
  }
  return c;
}

}  // namespace

std::vector<SuiteCase> run_gradient_suite(std::size_t instances, std::uint64_t seed) {
  std::vector<SuiteCase> out;
  Rng rng(seed);
  for (const auto& [name, make] : cases()) {
    SuiteCase sc;
    sc.name = name;
    for (std::size_t i = 0; i < instances; ++i) {
      Instance inst = make(rng);
      GradCheckOptions opt = inst.options;
      opt.coord_seed = rng.next();
      const GradCheckResult r = grad_check(inst.f, inst.inputs, opt, inst.wrt);
      ++sc.instances;
      if (r.ok) ++sc.passed;
      else if (sc.first_failure.empty())
        sc.first_failure = "instance " + std::to_string(i) + ": " + r.worst;
      sc.max_rel_error = std::max(sc.max_rel_error, r.max_rel_error);
    }
    out.push_back(std::move(sc));
  }
  return out;
}

}  // namespace bgan::testing
