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

// Compiled with -mavx2 -mpopcnt; only reached when the dispatcher has
// confirmed CPU support.

#include <immintrin.h>

#include <bit>

#include "bgan/kernels.hpp"

namespace bgan::kernels::avx2 {

namespace {

// Per-64-bit-lane population count: nibble lookup with vpshufb, then
// vpsadbw folds the byte counts of each lane.
inline __m256i popcount_epi64(__m256i v) {
  const __m256i lookup = _mm256_setr_epi8(
      0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
      0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  const __m256i lo = _mm256_and_si256(v, low_mask);
  const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
  const __m256i counts = _mm256_add_epi8(_mm256_shuffle_epi8(lookup, lo),
                                         _mm256_shuffle_epi8(lookup, hi));
  return _mm256_sad_epu8(counts, _mm256_setzero_si256());
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                             _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4),
                                             _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                             _mm256_loadu_pd(b + i)));
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void hamming_scan(const std::uint64_t* query, const std::uint64_t* db,
                  std::size_t n_codes, std::size_t words, std::uint32_t* out) {
  // Four codes per iteration, one 64-bit lane each.
  std::size_t c = 0;
  if (words == 1) {
    const __m256i q = _mm256_set1_epi64x(static_cast<long long>(query[0]));
    for (; c + 4 <= n_codes; c += 4) {
      const __m256i v = _mm256_loadu_si256(
          reinterpret_cast<const __m256i*>(db + c));
      alignas(32) std::uint64_t d[4];
      _mm256_store_si256(reinterpret_cast<__m256i*>(d),
                         popcount_epi64(_mm256_xor_si256(v, q)));
      for (int k = 0; k < 4; ++k) out[c + k] = static_cast<std::uint32_t>(d[k]);
    }
  } else {
    const auto stride = static_cast<long long>(words);
    const __m256i offsets = _mm256_setr_epi64x(0, stride, 2 * stride, 3 * stride);
    for (; c + 4 <= n_codes; c += 4) {
      const std::uint64_t* base = db + c * words;
      __m256i acc = _mm256_setzero_si256();
      for (std::size_t w = 0; w < words; ++w) {
        const __m256i v = _mm256_i64gather_epi64(
            reinterpret_cast<const long long*>(base + w), offsets, 8);
        const __m256i q = _mm256_set1_epi64x(static_cast<long long>(query[w]));
        acc = _mm256_add_epi64(acc, popcount_epi64(_mm256_xor_si256(v, q)));
      }
      alignas(32) std::uint64_t d[4];
      _mm256_store_si256(reinterpret_cast<__m256i*>(d), acc);
      for (int k = 0; k < 4; ++k) out[c + k] = static_cast<std::uint32_t>(d[k]);
    }
  }
  for (; c < n_codes; ++c) {
    const std::uint64_t* code = db + c * words;
    std::uint32_t d = 0;
    for (std::size_t w = 0; w < words; ++w)
      d += static_cast<std::uint32_t>(std::popcount(query[w] ^ code[w]));
    out[c] = d;
  }
}

}  // namespace bgan::kernels::avx2
