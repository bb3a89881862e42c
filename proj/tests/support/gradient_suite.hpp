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

// Finite-difference checks of every tensor op and every network composite,
// shared by the unit tests and the acceptance run.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace bgan::testing {

struct SuiteCase {
  std::string name;
  std::size_t instances = 0;
  std::size_t passed = 0;
  double max_rel_error = 0.0;
  std::string first_failure;

  bool ok() const { return passed == instances && instances > 0; }
};

/// Runs `instances` random instances of every case.
std::vector<SuiteCase> run_gradient_suite(std::size_t instances, std::uint64_t seed);

}  // namespace bgan::testing
