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

// Central finite-difference checks against the tape gradients.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bgan/autograd.hpp"
#include "bgan/random.hpp"

namespace bgan::testing {

/// Builds a scalar from leaves holding the given input values.
using ScalarFn = std::function<Var(Graph&, std::span<const Var>)>;

struct GradCheckResult {
  bool ok = true;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  // input/coordinate of the largest error
};

struct GradCheckOptions {
  double step = 1e-5;
  double rel_tol = 1e-4;
  // Gradients this small on both sides count as agreeing.
  double abs_floor = 1e-8;
  // Coordinates checked per input; 0 checks all of them.
  std::size_t max_coords = 0;
  std::uint64_t coord_seed = 1;
};

/// Compares d f / d inputs[i] with central differences for every input
/// whose index is in `wrt` (all inputs when empty).
GradCheckResult grad_check(const ScalarFn& f, std::vector<Tensor> inputs,
                           const GradCheckOptions& opt = {},
                           std::vector<std::size_t> wrt = {});

/// Tensor with entries uniform in [lo, hi].
Tensor random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0);
/// Like random_tensor but every entry has |v| >= gap (keeps inputs off kinks).
Tensor random_tensor_off_zero(Rng& rng, Shape shape, double lo, double hi, double gap);

}  // namespace bgan::testing
