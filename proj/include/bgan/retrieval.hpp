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

// Exact Hamming ranking by linear scan over bit-packed codes.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bgan/hashlayer.hpp"

namespace bgan {

/// popcount(a xor b) over the first `bits` bits.
std::uint32_t hamming_distance(std::span<const std::uint64_t> a,
                               std::span<const std::uint64_t> b, std::size_t bits);

struct RankedEntry {
  ItemId id;
  std::uint32_t distance;
  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

/// Ascending distance, equal distances by ascending id.
using RankedResult = std::vector<RankedEntry>;

class HammingIndex {
 public:
  explicit HammingIndex(CodeSet database);

  std::size_t size() const noexcept { return db_.n(); }
  std::size_t bits() const noexcept { return db_.bits; }
  const CodeSet& codes() const noexcept { return db_; }

  /// Distance from the query to every database code, in database order.
  std::vector<std::uint32_t> distances(std::span<const std::uint64_t> query) const;

  RankedResult rank_all(std::span<const std::uint64_t> query) const;
  /// First k entries of rank_all; throws when k exceeds the database size.
  RankedResult top_k(std::span<const std::uint64_t> query, std::size_t k) const;

 private:
  void check_query(std::span<const std::uint64_t> query) const;
  RankedResult ranked(std::span<const std::uint64_t> query, std::size_t limit) const;

  CodeSet db_;
  std::vector<std::uint32_t> by_id_;  // database rows sorted by id
};

}  // namespace bgan
