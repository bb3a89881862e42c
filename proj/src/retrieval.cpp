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

#include "bgan/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>

#include "bgan/error.hpp"
#include "bgan/kernels.hpp"

namespace bgan {

std::uint32_t hamming_distance(std::span<const std::uint64_t> a,
                               std::span<const std::uint64_t> b, std::size_t bits) {
  const std::size_t words = (bits + 63) / 64;
  if (a.size() != words || b.size() != words)
    throw InvalidArgument("hamming_distance: codes must hold " + std::to_string(words) +
                          " words for L=" + std::to_string(bits));
  std::uint32_t d = 0;
  for (std::size_t w = 0; w < words; ++w) {
    std::uint64_t x = a[w] ^ b[w];
    const std::size_t used = std::min<std::size_t>(64, bits - 64 * w);
    if (used < 64) x &= (std::uint64_t{1} << used) - 1;
    d += static_cast<std::uint32_t>(std::popcount(x));
  }
  return d;
}

HammingIndex::HammingIndex(CodeSet database) : db_(std::move(database)) {
  db_.validate();
  (void)index_by_id(db_.ids);  // rejects duplicates
  if (db_.n() > std::numeric_limits<std::uint32_t>::max())
    throw InvalidArgument("database too large");
  by_id_.resize(db_.n());
  std::iota(by_id_.begin(), by_id_.end(), 0u);
  std::sort(by_id_.begin(), by_id_.end(),
            [&](std::uint32_t x, std::uint32_t y) { return db_.ids[x] < db_.ids[y]; });
}

void HammingIndex::check_query(std::span<const std::uint64_t> query) const {
  if (query.size() != db_.words_per_code())
    throw InvalidArgument("query holds " + std::to_string(query.size()) +
                          " words, index codes hold " + std::to_string(db_.words_per_code()));
}

std::vector<std::uint32_t> HammingIndex::distances(std::span<const std::uint64_t> query) const {
  check_query(query);
  std::vector<std::uint32_t> out(db_.n());
  if (db_.n() == 0) return out;
  // Unused high bits are zero in valid codes; mask a query that is not.
  std::vector<std::uint64_t> q(query.begin(), query.end());
  const std::size_t tail = db_.bits % 64;
  if (tail != 0) q.back() &= (std::uint64_t{1} << tail) - 1;
  kernels::hamming_scan(q.data(), db_.words.data(), db_.n(), db_.words_per_code(), out.data());
  return out;
}

RankedResult HammingIndex::ranked(std::span<const std::uint64_t> query, std::size_t limit) const {
  const std::vector<std::uint32_t> dist = distances(query);
  // Counting sort by distance over id-ordered rows keeps ids ascending
  // within each distance.
  std::vector<std::size_t> start(db_.bits + 2, 0);
  for (std::uint32_t d : dist) ++start[d + 1];
  std::partial_sum(start.begin(), start.end(), start.begin());
  RankedResult out(db_.n());
  for (std::uint32_t row : by_id_) out[start[dist[row]]++] = {db_.ids[row], dist[row]};
  out.resize(limit);
  return out;
}

RankedResult HammingIndex::rank_all(std::span<const std::uint64_t> query) const {
  return ranked(query, db_.n());
}

RankedResult HammingIndex::top_k(std::span<const std::uint64_t> query, std::size_t k) const {
  if (k > db_.n())
    throw InvalidArgument("top_k: k=" + std::to_string(k) + " exceeds database size " +
                          std::to_string(db_.n()));
  return ranked(query, k);
}

}  // namespace bgan
