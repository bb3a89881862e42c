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

// Data-parallel inner loops used by the tensor engine, the neighborhood
// builder and the Hamming index. Every kernel has a scalar reference
// implementation; SIMD variants are selected once at runtime from the CPU
// feature set and can be overridden (tests, BGAN_ISA=scalar).
//
// axpy is bit-identical across variants (no FMA contraction, same
// operation order per element). dot reassociates its reduction, so its
// variants agree only to rounding.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace bgan::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// true if the variant was compiled in and the running CPU supports it.
bool isa_supported(Isa isa) noexcept;

/// ISA used by the dispatching entry points below.
Isa active_isa() noexcept;

/// Switch the dispatch table; throws std::invalid_argument when unsupported.
void set_active_isa(Isa isa);

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[c] = popcount(query ^ db[c]) over `words` 64-bit words per code.
  void (*hamming_scan)(const std::uint64_t* query, const std::uint64_t* db,
                       std::size_t n_codes, std::size_t words,
                       std::uint32_t* out);
};

const KernelTable& table(Isa isa);
const KernelTable& active() noexcept;

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void hamming_scan(const std::uint64_t* query, const std::uint64_t* db,
                         std::size_t n_codes, std::size_t words,
                         std::uint32_t* out) {
  active().hamming_scan(query, db, n_codes, words, out);
}

/// Row-major C (m x n) = op(A) * op(B) [+ C when accumulate].
/// op(A) is m x k, op(B) is k x n; operands are stored densely, so a
/// transposed A is held as k x m and a transposed B as n x k.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
          std::size_t k, const double* a, const double* b, double* c,
          bool accumulate);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void hamming_scan(const std::uint64_t* query, const std::uint64_t* db,
                  std::size_t n_codes, std::size_t words, std::uint32_t* out);
}  // namespace scalar

#if defined(BGAN_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void hamming_scan(const std::uint64_t* query, const std::uint64_t* db,
                  std::size_t n_codes, std::size_t words, std::uint32_t* out);
}  // namespace avx2
#endif

}  // namespace bgan::kernels
