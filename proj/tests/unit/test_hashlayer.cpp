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

#include <cmath>

#include "bgan/error.hpp"
#include "bgan/hashlayer.hpp"
#include "bgan/random.hpp"

using namespace bgan;

TEST_CASE("sign maps zero to +1") {
  const std::vector<double> z{0.2, -0.1, 0.0};
  CHECK(sign_binarize(z) == std::vector<std::int8_t>{1, -1, 1});
  const auto b = sign_binarize(z);
  const std::vector<double> as_real(b.begin(), b.end());
  CHECK(sign_binarize(as_real) == b);
  CHECK(sign_value(-0.0) == 1.0);
}

TEST_CASE("surrogate fixtures") {
  CHECK(surrogate(0.3, 2.0, SurrogateKind::App) == doctest::Approx(0.6));
  CHECK(surrogate(0.8, 2.0, SurrogateKind::App) == 1.0);
  CHECK(surrogate(-3.0, 1.0, SurrogateKind::App) == -1.0);
  CHECK(surrogate(0.0, 7.0, SurrogateKind::Tanh) == 0.0);
  CHECK_THROWS_AS(surrogate(0.1, 0.5, SurrogateKind::App), InvalidArgument);
  const std::vector<double> z{-3, 0.4, 2};
  CHECK(surrogate_activation(z, 1.0, SurrogateKind::App) == std::vector<double>{-1, 0.4, 1});
}

TEST_CASE("continuation grid: monotone approach, exact saturation, sign invariance") {
  std::vector<double> grid;
  for (int k = -2000; k <= 2000; ++k)
    if (k != 0) grid.push_back(k / 1000.0);
  Rng rng(1);
  for (int k = 0; k < 2000; ++k) {
    const double z = rng.uniform(-2, 2);
    if (z != 0.0) grid.push_back(z);
  }
  const double betas[] = {1, 2, 5, 10, 100};
  for (SurrogateKind kind : {SurrogateKind::App, SurrogateKind::Tanh}) {
    for (double z : grid) {
      double prev = 3.0;
      for (double beta : betas) {
        const double s = surrogate(z, beta, kind);
        const double gap = std::abs(s - sign_value(z));
        CHECK(gap <= prev);
        prev = gap;
        CHECK(sign_value(s) == sign_value(z));
        if (kind == SurrogateKind::App) CHECK((s == sign_value(z)) == (beta * std::abs(z) >= 1.0));
      }
    }
  }
}

TEST_CASE("app saturates once beta >= 1 / delta") {
  for (double delta : {0.5, 0.1, 0.01}) {
    const double beta = 1.0 / delta;
    for (double z : {delta, 2 * delta, -delta, -1.5})
      CHECK(surrogate(z, beta, SurrogateKind::App) == sign_value(z));
  }
}

TEST_CASE("graph surrogate agrees with the pointwise form") {
  Graph g;
  const std::vector<double> z{-1.2, -0.3, 0.0, 0.05, 0.7};
  const Var v = g.constant(Tensor({5}, z));
  for (SurrogateKind kind : {SurrogateKind::App, SurrogateKind::Tanh}) {
    const Tensor out = surrogate_activation(v, 3.0, kind).value();
    for (std::size_t i = 0; i < z.size(); ++i)
      CHECK(out[i] == doctest::Approx(surrogate(z[i], 3.0, kind)).epsilon(1e-15));
  }
  CHECK(surrogate_for(Activation::TwoStep) == SurrogateKind::Tanh);
  CHECK(surrogate_for(Activation::App) == SurrogateKind::App);
}

TEST_CASE("plateau rule") {
  const ContinuationSchedule s({1, 3, 10}, 3, 1e-3);
  const std::vector<double> flat(6, 1.0);
  CHECK(s.plateaued(flat));
  CHECK(advance_stage(s, flat).stage() == 1);

  const std::vector<double> steep{10, 9, 8, 7, 6, 5};
  CHECK_FALSE(s.plateaued(steep));
  CHECK(advance_stage(s, steep).stage() == 0);

  // Fewer than two windows in the stage never plateaus.
  const std::vector<double> short_history(5, 1.0);
  CHECK_FALSE(s.plateaued(short_history));
  // A forced advance ignores the rule.
  CHECK(advance_stage(s, steep, true).stage() == 1);
  CHECK_THROWS_AS(advance_stage(s, std::vector<double>{}), InvalidArgument);
}

TEST_CASE("scripted trace over (1, 3, 10) advances exactly twice, then finishes") {
  ContinuationSchedule s({1, 3, 10}, 3, 1e-3);
  std::vector<double> history;
  std::size_t advances = 0;
  double beta_prev = s.beta();
  // Three descending phases, each followed by a plateau.
  for (int phase = 0; phase < 3 && !s.finished(); ++phase) {
    for (int e = 0; e < 8; ++e) history.push_back(10.0 - phase * 3 - e * 0.3);
    for (int e = 0; e < 8 && !s.finished(); ++e) {
      history.push_back(history.back());
      const std::size_t before = s.stage();
      s = advance_stage(s, history);
      CHECK(s.beta() >= beta_prev);
      beta_prev = s.beta();
      if (s.stage() != before) {
        ++advances;
        break;
      }
    }
  }
  CHECK(advances == 2);
  CHECK(s.terminal());
  CHECK(s.finished());
  CHECK(s.beta() == 10.0);
}

TEST_CASE("stage boundaries: the new stage only sees its own epochs") {
  ContinuationSchedule s({1, 2}, 2, 1e-3);
  std::vector<double> h{5, 5, 5, 5};
  s = advance_stage(s, h);
  REQUIRE(s.stage() == 1);
  CHECK(s.stage_start_epoch() == 4);
  h.push_back(5);
  CHECK_FALSE(s.plateaued(h));  // one epoch into the stage
}

TEST_CASE("two_step collapses to a single stage at beta 1") {
  RunConfig c;
  c.activation = Activation::TwoStep;
  const auto s = ContinuationSchedule::from_config(c);
  CHECK(s.stage_count() == 1);
  CHECK(s.beta() == 1.0);
  CHECK(s.terminal());
  c.activation = Activation::App;
  CHECK(ContinuationSchedule::from_config(c).betas() == std::vector<double>{1, 3, 10});
}

TEST_CASE("schedule validation") {
  CHECK_THROWS_AS(ContinuationSchedule({2, 3}, 3, 1e-3), InvalidArgument);
  CHECK_THROWS_AS(ContinuationSchedule({1, 1}, 3, 1e-3), InvalidArgument);
  CHECK_THROWS_AS(ContinuationSchedule({1}, 0, 1e-3), InvalidArgument);
}

TEST_CASE("code packing") {
  const std::vector<ItemId> ids{1};
  const CodeSet c = pack_codes(ids, std::vector<double>{1, -1, 1, 1}, 4);
  CHECK(c.words == std::vector<std::uint64_t>{0b1101});
  CHECK_THROWS_AS(pack_codes(ids, std::vector<double>{1, 0, 1, 1}, 4), InvalidArgument);

  std::vector<double> v(65, -1.0);
  v[64] = 1.0;
  const CodeSet wide = pack_codes(ids, v, 65);
  CHECK(wide.words_per_code() == 2);
  CHECK(wide.words == std::vector<std::uint64_t>{0, 1});

  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t bits = 1 + rng.below(200), n = 1 + rng.below(8);
    std::vector<ItemId> rid(n);
    for (std::size_t i = 0; i < n; ++i) rid[i] = i * 3;
    std::vector<double> b(n * bits);
    for (double& x : b) x = (rng.next() & 1) ? 1.0 : -1.0;
    const CodeSet cs = pack_codes(rid, b, bits);
    CHECK_NOTHROW(cs.validate());
    CHECK(unpack_codes(cs) == b);
  }
}
