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

// Pseudo-similarity structure S over the training items: cosine K1-NN
// lists, their overlap-driven expansion, and the label-based variant.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bgan/dataset.hpp"

namespace bgan {

using ItemIndex = std::uint32_t;

struct NeighborList {
  ItemIndex owner = 0;
  std::vector<ItemIndex> neighbors;  // most similar first
  friend bool operator==(const NeighborList&, const NeighborList&) = default;
};

using NeighborLists = std::vector<NeighborList>;

/// Symmetric +-1 matrix kept as its set of positive off-diagonal pairs.
/// Diagonal entries read as +1; callers exclude them from loss sums and
/// precision counts.
class NeighborhoodMatrix {
 public:
  using Pair = std::pair<ItemIndex, ItemIndex>;

  NeighborhoodMatrix() = default;
  /// Pairs are normalized to i < j, sorted and deduplicated; self-pairs are
  /// rejected.
  NeighborhoodMatrix(std::size_t n, std::vector<Pair> positive_pairs);

  std::size_t n() const noexcept { return n_; }
  const std::vector<Pair>& pairs() const noexcept { return pairs_; }
  std::size_t positive_pair_count() const noexcept { return pairs_.size(); }
  bool diagonal_positive() const noexcept { return true; }

  /// s_ij in {-1, +1}.
  int value(std::size_t i, std::size_t j) const;
  /// Positive partners of i, ascending.
  std::span<const ItemIndex> row(std::size_t i) const;
  /// Mean number of positive partners per item.
  double mean_positive_count() const noexcept;

  friend bool operator==(const NeighborhoodMatrix& a, const NeighborhoodMatrix& b) {
    return a.n_ == b.n_ && a.pairs_ == b.pairs_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Pair> pairs_;
  std::vector<std::size_t> row_offsets_;
  std::vector<ItemIndex> row_items_;
};

/// The k most cosine-similar items of every row, descending similarity,
/// ties by ascending index. Requires k < n and no zero-norm rows.
NeighborLists cosine_knn(const FeatureSet& fs, std::size_t k);

/// s_ij = +1 iff j in L_i or i in L_j.
NeighborhoodMatrix build_s1(const NeighborLists& lists, std::size_t n);

/// For every i: rank all j != i by |L_i n L_j| (descending, ties by
/// ascending j), keep the top k2, and return the union of their lists in
/// first-seen order with i removed.
NeighborLists expand_neighbors(const NeighborLists& lists, std::size_t k2);

/// S1 plus every (i, j) with j in the expanded list of i, symmetrized.
NeighborhoodMatrix build_final_s(const NeighborhoodMatrix& s1, const NeighborLists& lists,
                                 const NeighborLists& expanded);

/// Whole unsupervised pipeline: cosine K1-NN, S1, expansion, final S.
NeighborhoodMatrix build_neighborhood(const FeatureSet& fs, std::size_t k1, std::size_t k2);

/// s_ij = +1 iff the label sets of i and j intersect.
NeighborhoodMatrix build_from_labels(const LabelSet& labels);

/// Fraction of positive pairs whose label sets intersect; rows of S index
/// the label set positionally.
double neighborhood_precision(const NeighborhoodMatrix& s, const LabelSet& labels);

}  // namespace bgan
