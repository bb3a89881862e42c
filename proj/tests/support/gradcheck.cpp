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

#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace bgan::testing {

GradCheckResult grad_check(const ScalarFn& f, std::vector<Tensor> inputs,
                           const GradCheckOptions& opt, std::vector<std::size_t> wrt) {
  if (wrt.empty())
    for (std::size_t i = 0; i < inputs.size(); ++i) wrt.push_back(i);

  auto evaluate = [&](const std::vector<Tensor>& values) {
    Graph g;
    std::vector<Var> leaves;
    for (const auto& v : values) leaves.push_back(g.leaf(v));
    return f(g, leaves).value().item();
  };

  std::vector<Tensor> analytic;
  {
    Graph g;
    std::vector<Var> leaves;
    for (const auto& v : inputs) leaves.push_back(g.leaf(v));
    const Var out = f(g, leaves);
    g.backward(out);
    for (const Var& l : leaves) analytic.push_back(g.grad(l));
  }

  GradCheckResult res;
  Rng rng(opt.coord_seed);
  for (std::size_t i : wrt) {
    std::vector<std::size_t> coords(inputs[i].size());
    for (std::size_t c = 0; c < coords.size(); ++c) coords[c] = c;
    if (opt.max_coords != 0 && coords.size() > opt.max_coords) {
      rng.shuffle(coords.begin(), coords.end());
      coords.resize(opt.max_coords);
    }
    for (std::size_t c : coords) {
      const double orig = inputs[i][c];
      inputs[i][c] = orig + opt.step;
      const double up = evaluate(inputs);
      inputs[i][c] = orig - opt.step;
      const double down = evaluate(inputs);
      inputs[i][c] = orig;
      const double numeric = (up - down) / (2.0 * opt.step);
      const double a = analytic[i][c];
      const double diff = std::abs(a - numeric);
      const double scale = std::max(std::abs(a), std::abs(numeric));
      const double rel = scale > 0.0 ? diff / scale : 0.0;
      ++res.checked;
      const bool agree = diff <= opt.abs_floor || rel <= opt.rel_tol;
      if (!agree && (res.ok || rel > res.max_rel_error))
        res.worst = "input " + std::to_string(i) + "[" + std::to_string(c) +
                    "]: analytic " + std::to_string(a) + " numeric " + std::to_string(numeric);
      if (!agree) res.ok = false;
      if (diff > opt.abs_floor) res.max_rel_error = std::max(res.max_rel_error, rel);
    }
  }
  return res;
}

Tensor random_tensor(Rng& rng, Shape shape, double lo, double hi) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

Tensor random_tensor_off_zero(Rng& rng, Shape shape, double lo, double hi, double gap) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) {
    do v = rng.uniform(lo, hi);
    while (std::abs(v) < gap);
  }
  return t;
}

}  // namespace bgan::testing
