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

#include "bgan/losses.hpp"

#include <cmath>
#include <cstdio>

#include "bgan/error.hpp"

namespace bgan {

namespace {

void require_same_shape(const char* what, Var a, Var b) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Tensor batch_similarity(const NeighborhoodMatrix& s, std::span<const std::size_t> rows) {
  const std::size_t n = rows.size();
  Tensor t({n, n});
  for (std::size_t a = 0; a < n; ++a) {
    if (rows[a] >= s.n()) throw InvalidArgument("batch row outside neighborhood index space");
    for (std::size_t b = a + 1; b < n; ++b) {
      const double v = s.value(static_cast<ItemIndex>(rows[a]), static_cast<ItemIndex>(rows[b]));
      t[a * n + b] = v;
      t[b * n + a] = v;
    }
  }
  return t;
}

Var neighborhood_loss(Var codes, const Tensor& similarity, bool normalize) {
  if (codes.shape().size() != 2) throw ShapeError("neighborhood_loss: codes must be [n x L]");
  const std::size_t n = codes.shape()[0], bits = codes.shape()[1];
  if (n < 2) throw InvalidArgument("neighborhood_loss needs at least 2 items");
  if (similarity.shape() != Shape{n, n})
    throw ShapeError("neighborhood_loss: similarity must be " + shape_str({n, n}) + ", got " +
                     shape_str(similarity.shape()));
  Graph& g = codes.graph();
  // Strict upper triangle selects each unordered pair once.
  Tensor mask({n, n});
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) mask[a * n + b] = 1.0;
  const Var inner = ops::scale(ops::matmul(codes, ops::transpose(codes)),
                               1.0 / static_cast<double>(bits));
  const Var residual = ops::mul(ops::sub(inner, g.constant(similarity)), g.constant(mask));
  const double pairs = static_cast<double>(n * (n - 1) / 2);
  return ops::scale(ops::sum(ops::square(residual)), normalize ? 0.5 / pairs : 0.5);
}

Var mse_loss(Var images, Var reconstructions) {
  require_same_shape("mse_loss", images, reconstructions);
  return ops::mean(ops::square(ops::sub(images, reconstructions)));
}

Var perceptual_loss(Var phi_images, Var phi_reconstructions) {
  require_same_shape("perceptual_loss", phi_images, phi_reconstructions);
  return ops::mean(ops::square(ops::sub(phi_images, phi_reconstructions)));
}

Var adversarial_loss(Var p_real, Var p_fake, double eps) {
  const Var real = ops::mean(ops::log(ops::clamp(p_real, eps, 1.0 - eps)));
  const Var one_minus_fake = ops::add_scalar(ops::scale(ops::clamp(p_fake, eps, 1.0 - eps), -1.0), 1.0);
  return ops::add(real, ops::mean(ops::log(one_minus_fake)));
}

Var non_saturating_loss(Var p_fake, double eps) {
  return ops::scale(ops::mean(ops::log(ops::clamp(p_fake, eps, 1.0 - eps))), -1.0);
}

LossBreakdown total_loss(const LossParts& parts, double lambda1, double lambda2) {
  const std::pair<const char*, double> named[] = {{"l_n", parts.l_n},
                                                  {"l_mse", parts.l_mse},
                                                  {"l_perceptual", parts.l_perceptual},
                                                  {"l_a", parts.l_a}};
  for (const auto& [name, v] : named)
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite loss component ") + name);
  LossBreakdown b;
  b.l_n = parts.l_n;
  b.l_mse = parts.l_mse;
  b.l_perceptual = parts.l_perceptual;
  b.l_c = parts.l_mse + parts.l_perceptual;
  b.l_a = parts.l_a;
  b.lambda1 = lambda1;
  b.lambda2 = lambda2;
  b.total = b.l_n + lambda1 * b.l_c + lambda2 * b.l_a;
  if (!std::isfinite(b.total)) throw NumericError("non-finite total loss");
  return b;
}

LossBreakdown mean_breakdown(std::span<const LossBreakdown> items) {
  LossBreakdown m;
  if (items.empty()) return m;
  for (const auto& b : items) {
    m.l_n += b.l_n;
    m.l_mse += b.l_mse;
    m.l_perceptual += b.l_perceptual;
    m.l_c += b.l_c;
    m.l_a += b.l_a;
    m.total += b.total;
  }
  const double k = static_cast<double>(items.size());
  m.l_n /= k;
  m.l_mse /= k;
  m.l_perceptual /= k;
  m.l_c /= k;
  m.l_a /= k;
  m.total /= k;
  m.lambda1 = items.front().lambda1;
  m.lambda2 = items.front().lambda2;
  return m;
}

std::string LossBreakdown::describe() const {
  return "l_n=" + fmt(l_n) + " l_mse=" + fmt(l_mse) + " l_perceptual=" + fmt(l_perceptual) +
         " l_c=" + fmt(l_c) + " l_a=" + fmt(l_a) + " total=" + fmt(total) +
         " lambda1=" + fmt(lambda1) + " lambda2=" + fmt(lambda2);
}

std::string log_header() { return "epoch,stage,beta,l_n,l_mse,l_perceptual,l_c,l_a,total\n"; }

std::string log_row(std::size_t epoch, std::size_t stage, double beta, const LossBreakdown& b) {
  return std::to_string(epoch) + "," + std::to_string(stage) + "," + fmt(beta) + "," +
         fmt(b.l_n) + "," + fmt(b.l_mse) + "," + fmt(b.l_perceptual) + "," + fmt(b.l_c) + "," +
         fmt(b.l_a) + "," + fmt(b.total) + "\n";
}

}  // namespace bgan
