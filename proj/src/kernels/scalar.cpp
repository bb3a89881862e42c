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

#include <bit>

#include "bgan/kernels.hpp"

namespace bgan::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void hamming_scan(const std::uint64_t* query, const std::uint64_t* db,
                  std::size_t n_codes, std::size_t words, std::uint32_t* out) {
  for (std::size_t c = 0; c < n_codes; ++c) {
    const std::uint64_t* code = db + c * words;
    std::uint32_t d = 0;
    for (std::size_t w = 0; w < words; ++w)
      d += static_cast<std::uint32_t>(std::popcount(query[w] ^ code[w]));
    out[c] = d;
  }
}

}  // namespace bgan::kernels::scalar
