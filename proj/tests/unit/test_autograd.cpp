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

#include "bgan/autograd.hpp"
#include "bgan/error.hpp"
#include "gradcheck.hpp"
#include "gradient_suite.hpp"

using namespace bgan;

TEST_CASE("gradient of sum of squares") {
  Graph g;
  const Var x = g.leaf(Tensor({2}, std::vector<double>{1, -2}));
  g.backward(ops::sum(ops::square(x)));
  CHECK(g.grad(x).vector() == std::vector<double>{2, -4});
}

TEST_CASE("fan-out accumulates") {
  Graph g;
  const Var x = g.leaf(Tensor::scalar(3.0));
  g.backward(ops::add(x, x));
  CHECK(g.grad(x).item() == 2.0);
}

TEST_CASE("backward can be repeated after zero_grad") {
  Graph g;
  const Var x = g.leaf(Tensor::scalar(2.0));
  const Var a = ops::square(x);
  const Var b = ops::scale(x, 5.0);
  g.backward(a);
  CHECK(g.grad(x).item() == 4.0);
  g.zero_grad();
  g.backward(b);
  CHECK(g.grad(x).item() == 5.0);
}

TEST_CASE("constants receive no gradient and unreached nodes read zero") {
  Graph g;
  const Var c = g.constant(Tensor({2}, 1.0));
  const Var x = g.leaf(Tensor({2}, 2.0));
  const Var unused = g.leaf(Tensor({3}, 1.0));
  g.backward(ops::sum(ops::mul(c, x)));
  CHECK_FALSE(g.requires_grad(c));
  CHECK(g.grad(x).vector() == std::vector<double>{1, 1});
  CHECK(g.grad(unused).vector() == std::vector<double>{0, 0, 0});
}

TEST_CASE("backward on non-scalar is an error") {
  Graph g;
  const Var x = g.leaf(Tensor({2}, 1.0));
  CHECK_THROWS_AS(g.backward(x), ShapeError);
}

TEST_CASE("checked mode rejects non-finite values") {
  Graph g;
  const Var x = g.leaf(Tensor({1}, 0.0));
  CHECK_THROWS_AS(ops::log(x), Error);
  Graph h;
  const Var big = h.leaf(Tensor({1}, 1e300));
  CHECK_THROWS_AS(ops::square(big), NumericError);
}

TEST_CASE("shape mismatches are descriptive errors") {
  Graph g;
  const Var a = g.leaf(Tensor({2, 3}));
  const Var b = g.leaf(Tensor({2, 2}));
  CHECK_THROWS_AS(ops::add(a, b), ShapeError);
  CHECK_THROWS_AS(ops::matmul(a, b), ShapeError);
  CHECK_THROWS_AS(ops::reshape(a, {5}), ShapeError);
}

TEST_CASE("conv2d on ones: centre 9, corner 4") {
  Graph g;
  const Var x = g.constant(Tensor({1, 1, 4, 4}, 1.0));
  const Var w = g.constant(Tensor({1, 1, 3, 3}, 1.0));
  const Tensor y = ops::conv2d(x, w, 1, 1).value();
  CHECK(y.shape() == Shape{1, 1, 4, 4});
  CHECK(y[0] == 4.0);
  CHECK(y[5] == 9.0);
  CHECK(y[1] == 6.0);
}

TEST_CASE("conv extents") {
  CHECK(conv_out_extent(16, 3, 2, 1) == 8);
  CHECK(conv_out_extent(8, 5, 2, 2) == 4);
  CHECK(conv_out_extent(4, 3, 1, 1) == 4);
  Graph g;
  const Var x = g.constant(Tensor({1, 2, 3, 3}, 1.0));
  const Var w = g.constant(Tensor({2, 4, 4, 4}, 1.0));
  CHECK(ops::conv_transpose2d(x, w, 2, 1).shape() == Shape{1, 4, 6, 6});
}

TEST_CASE("conv_transpose2d is the adjoint of conv2d") {
  // <conv(x), y> == <x, conv_t(y)> with the same weights; 7x7 keeps the
  // transposed extent equal to the input extent.
  bgan::Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t ic = 1 + rng.below(3), oc = 1 + rng.below(3);
    Graph g;
    const Tensor xv = testing::random_tensor(rng, {2, ic, 7, 7});
    const Tensor wv = testing::random_tensor(rng, {oc, ic, 3, 3});
    const Var conv = ops::conv2d(g.constant(xv), g.constant(wv), 2, 1);
    const Tensor yv = testing::random_tensor(rng, conv.shape());
    const Var back = ops::conv_transpose2d(g.constant(yv), g.constant(wv), 2, 1);
    REQUIRE(back.shape() == xv.shape());
    double lhs = 0, rhs = 0;
    for (std::size_t i = 0; i < yv.size(); ++i) lhs += conv.value()[i] * yv[i];
    for (std::size_t i = 0; i < xv.size(); ++i) rhs += xv[i] * back.value()[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("activation fixtures") {
  Graph g;
  const Var x = g.constant(Tensor({3}, std::vector<double>{-3, 0.4, 2}));
  CHECK(ops::app_act(x, 1.0).value().vector() == std::vector<double>{-1, 0.4, 1});
  const Var z = g.constant(Tensor({1}, 0.0));
  CHECK(ops::relu(z).value()[0] == 0.0);
  CHECK(ops::elu(z).value()[0] == 0.0);
  CHECK(ops::sigmoid(z).value()[0] == 0.5);
  CHECK(ops::tanh_act(z).value()[0] == 0.0);
}

TEST_CASE("app backward passes beta inside and on the clip boundary") {
  Graph g;
  const Var x = g.leaf(Tensor({4}, std::vector<double>{0.1, 0.5, -0.5, 0.9}));
  g.backward(ops::sum(ops::app_act(x, 2.0)));
  CHECK(g.grad(x).vector() == std::vector<double>{2, 2, 2, 0});
}

TEST_CASE("batchnorm eval is affine in its input") {
  BatchNormState st;
  st.running_mean = Tensor({2}, std::vector<double>{0.5, -1});
  st.running_var = Tensor({2}, std::vector<double>{2, 0.5});
  Graph g;
  const Var gamma = g.constant(Tensor({2}, std::vector<double>{1.5, 0.7}));
  const Var beta = g.constant(Tensor({2}, std::vector<double>{0.1, -0.2}));
  const Tensor xv({3, 2}, std::vector<double>{1, 2, -1, 0.5, 3, -2});
  Tensor x2 = xv;
  for (double& v : x2.values()) v *= 2.5;
  const Tensor zero({3, 2});
  const Tensor f0 = ops::batchnorm(g.constant(zero), gamma, beta, st, false).value();
  const Tensor f1 = ops::batchnorm(g.constant(xv), gamma, beta, st, false).value();
  const Tensor f2 = ops::batchnorm(g.constant(x2), gamma, beta, st, false).value();
  for (std::size_t i = 0; i < xv.size(); ++i)
    CHECK(f2[i] - f0[i] == doctest::Approx(2.5 * (f1[i] - f0[i])).epsilon(1e-12));
  // Eval mode leaves the running statistics alone.
  CHECK(st.running_mean[0] == 0.5);
}

TEST_CASE("batchnorm train updates running statistics") {
  BatchNormState st;
  Graph g;
  const Var gamma = g.constant(Tensor({1}, 1.0));
  const Var beta = g.constant(Tensor({1}, 0.0));
  const Var x = g.constant(Tensor({4, 1}, std::vector<double>{1, 2, 3, 4}));
  const Tensor y = ops::batchnorm(x, gamma, beta, st, true).value();
  double mean = 0;
  for (double v : y.values()) mean += v;
  CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(st.running_mean[0] == doctest::Approx(0.25));
  CHECK(st.running_var[0] == doctest::Approx(0.9 + 0.1 * (5.0 / 3.0)));
}

TEST_CASE("every op and composite passes the finite-difference check") {
  for (const auto& c : testing::run_gradient_suite(3, 2024)) {
    CAPTURE(c.name);
    CAPTURE(c.first_failure);
    CHECK(c.ok());
  }
}
