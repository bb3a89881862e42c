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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "bgan/kernels.hpp"

namespace bgan::kernels {

namespace {

constexpr KernelTable kScalarTable{Isa::Scalar, &scalar::dot, &scalar::axpy,
                                   &scalar::hamming_scan};
#if defined(BGAN_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Isa::Avx2, &avx2::dot, &avx2::axpy,
                                 &avx2::hamming_scan};
#endif

bool cpu_has_avx2() noexcept {
#if defined(BGAN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
#else
  return false;
#endif
}

const KernelTable* initial_table() noexcept {
  if (const char* forced = std::getenv("BGAN_ISA")) {
    if (std::string(forced) == "scalar") return &kScalarTable;
  }
#if defined(BGAN_HAVE_AVX2)
  if (cpu_has_avx2()) return &kAvx2Table;
#endif
  return &kScalarTable;
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2: return cpu_has_avx2();
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!isa_supported(isa))
    throw std::invalid_argument("kernel ISA not available: " +
                                std::string(isa_name(isa)));
#if defined(BGAN_HAVE_AVX2)
  if (isa == Isa::Avx2) return kAvx2Table;
#endif
  return kScalarTable;
}

Isa active_isa() noexcept { return current().load()->isa; }

void set_active_isa(Isa isa) { current().store(&table(isa)); }

const KernelTable& active() noexcept { return *current().load(); }

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
          std::size_t k, const double* a, const double* b, double* c,
          bool accumulate) {
  const KernelTable& kt = active();
  if (!accumulate)
    for (std::size_t i = 0; i < m * n; ++i) c[i] = 0.0;
  if (trans_b) {
    // B stored n x k: every output is a contiguous dot product once A's row
    // is contiguous too.
    if (!trans_a) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
          c[i * n + j] += kt.dot(a + i * k, b + j * k, k);
      return;
    }
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t i = 0; i < m; ++i) {
        const double aip = a[p * m + i];
        if (aip == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] += aip * b[j * k + p];
      }
    return;
  }
  // B stored k x n: accumulate scaled rows of B.
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = trans_a ? a[p * m + i] : a[i * k + p];
      if (aip == 0.0) continue;
      kt.axpy(aip, b + p * n, crow, n);
    }
  }
}

}  // namespace bgan::kernels
