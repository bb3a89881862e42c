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

#include "bgan/neighborhood.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bgan/error.hpp"
#include "bgan/kernels.hpp"

namespace bgan {

NeighborhoodMatrix::NeighborhoodMatrix(std::size_t n, std::vector<Pair> positive_pairs)
    : n_(n), pairs_(std::move(positive_pairs)) {
  for (Pair& p : pairs_) {
    if (p.first == p.second)
      throw InvalidArgument("neighborhood: self-pair (" + std::to_string(p.first) + "," +
                            std::to_string(p.second) + ")");
    if (p.first > p.second) std::swap(p.first, p.second);
    if (p.second >= n)
      throw InvalidArgument("neighborhood: pair index " + std::to_string(p.second) +
                            " out of range for n=" + std::to_string(n));
  }
  std::sort(pairs_.begin(), pairs_.end());
  pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());

  std::vector<std::size_t> degree(n + 1, 0);
  for (const Pair& p : pairs_) {
    ++degree[p.first + 1];
    ++degree[p.second + 1];
  }
  row_offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) row_offsets_[i + 1] = row_offsets_[i] + degree[i + 1];
  row_items_.assign(row_offsets_[n], 0);
  std::vector<std::size_t> fill(row_offsets_.begin(), row_offsets_.end() - 1);
  for (const Pair& p : pairs_) {
    row_items_[fill[p.first]++] = p.second;
    row_items_[fill[p.second]++] = p.first;
  }
  for (std::size_t i = 0; i < n; ++i)
    std::sort(row_items_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]),
              row_items_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]));
}

int NeighborhoodMatrix::value(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw InvalidArgument("neighborhood: index out of range");
  if (i == j) return 1;
  auto r = row(i);
  return std::binary_search(r.begin(), r.end(), static_cast<ItemIndex>(j)) ? 1 : -1;
}

std::span<const ItemIndex> NeighborhoodMatrix::row(std::size_t i) const {
  if (i >= n_) throw InvalidArgument("neighborhood: row out of range");
  return {row_items_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
}

double NeighborhoodMatrix::mean_positive_count() const noexcept {
  return n_ == 0 ? 0.0 : 2.0 * static_cast<double>(pairs_.size()) / static_cast<double>(n_);
}

NeighborLists cosine_knn(const FeatureSet& fs, std::size_t k) {
  fs.validate();
  const std::size_t n = fs.n(), m = fs.m;
  if (k >= n)
    throw InvalidArgument("cosine_knn: k=" + std::to_string(k) + " must be < n=" +
                          std::to_string(n));
  // cos = <x, y> / sqrt(|x|^2 |y|^2). Products of floats are exact in
  // double, so rows that tie exactly (duplicates, integer data) still tie
  // after rounding and fall through to the index rule.
  std::vector<double> rows(n * m), sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = fs.row(i);
    for (std::size_t d = 0; d < m; ++d) rows[i * m + d] = row[d];
    sq[i] = kernels::dot(rows.data() + i * m, rows.data() + i * m, m);
    if (sq[i] == 0.0)
      throw InvalidArgument("cosine_knn: item " + std::to_string(fs.ids[i]) +
                            " has a zero-norm feature vector");
  }

  NeighborLists lists(n);
  std::vector<double> sim(n);
  std::vector<ItemIndex> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    order.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sim[j] = kernels::dot(rows.data() + i * m, rows.data() + j * m, m) / std::sqrt(sq[i] * sq[j]);
      order.push_back(static_cast<ItemIndex>(j));
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](ItemIndex a, ItemIndex b) {
                        return sim[a] != sim[b] ? sim[a] > sim[b] : a < b;
                      });
    lists[i].owner = static_cast<ItemIndex>(i);
    lists[i].neighbors.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return lists;
}

namespace {

void check_lists(const NeighborLists& lists, std::size_t n) {
  if (lists.size() != n)
    throw InvalidArgument("neighbor lists cover " + std::to_string(lists.size()) +
                          " items, expected " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (lists[i].owner != i)
      throw InvalidArgument("neighbor list " + std::to_string(i) + " has owner " +
                            std::to_string(lists[i].owner));
    for (ItemIndex j : lists[i].neighbors)
      if (j >= n || j == i)
        throw InvalidArgument("neighbor list " + std::to_string(i) +
                              " holds invalid entry " + std::to_string(j));
  }
}

void append_list_pairs(const NeighborLists& lists, std::vector<NeighborhoodMatrix::Pair>& pairs) {
  for (const NeighborList& l : lists)
    for (ItemIndex j : l.neighbors) pairs.emplace_back(l.owner, j);
}

}  // namespace

NeighborhoodMatrix build_s1(const NeighborLists& lists, std::size_t n) {
  check_lists(lists, n);
  std::vector<NeighborhoodMatrix::Pair> pairs;
  append_list_pairs(lists, pairs);
  return NeighborhoodMatrix(n, std::move(pairs));
}

NeighborLists expand_neighbors(const NeighborLists& lists, std::size_t k2) {
  const std::size_t n = lists.size();
  check_lists(lists, n);
  if (k2 > n) throw InvalidArgument("expand_neighbors: k2 exceeds item count");

  // holders[m] = every j whose list contains m.
  std::vector<std::vector<ItemIndex>> holders(n);
  for (const NeighborList& l : lists)
    for (ItemIndex m : l.neighbors) holders[m].push_back(l.owner);

  NeighborLists out(n);
  std::vector<std::uint32_t> overlap(n, 0);
  std::vector<ItemIndex> touched, selected;
  std::vector<char> seen(n, 0), chosen(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].owner = static_cast<ItemIndex>(i);
    if (k2 == 0) continue;
    touched.clear();
    for (ItemIndex m : lists[i].neighbors)
      for (ItemIndex j : holders[m]) {
        if (j == i) continue;
        if (overlap[j]++ == 0) touched.push_back(j);
      }
    std::sort(touched.begin(), touched.end(), [&](ItemIndex a, ItemIndex b) {
      return overlap[a] != overlap[b] ? overlap[a] > overlap[b] : a < b;
    });
    selected.assign(touched.begin(),
                    touched.begin() + static_cast<std::ptrdiff_t>(std::min(k2, touched.size())));
    // Zero-overlap lists still fill the top-k2 selection, ascending by index.
    for (ItemIndex s : selected) chosen[s] = 1;
    for (std::size_t j = 0; j < n && selected.size() < k2; ++j)
      if (j != i && !chosen[j] && overlap[j] == 0) selected.push_back(static_cast<ItemIndex>(j));
    for (ItemIndex s : selected) chosen[s] = 0;
    for (ItemIndex j : touched) overlap[j] = 0;

    auto& merged = out[i].neighbors;
    for (ItemIndex s : selected)
      for (ItemIndex m : lists[s].neighbors)
        if (m != i && !seen[m]) {
          seen[m] = 1;
          merged.push_back(m);
        }
    for (ItemIndex m : merged) seen[m] = 0;
  }
  return out;
}

NeighborhoodMatrix build_final_s(const NeighborhoodMatrix& s1, const NeighborLists& lists,
                                 const NeighborLists& expanded) {
  const std::size_t n = s1.n();
  check_lists(lists, n);
  check_lists(expanded, n);
  std::vector<NeighborhoodMatrix::Pair> pairs = s1.pairs();
  append_list_pairs(expanded, pairs);
  return NeighborhoodMatrix(n, std::move(pairs));
}

NeighborhoodMatrix build_neighborhood(const FeatureSet& fs, std::size_t k1, std::size_t k2) {
  const NeighborLists lists = cosine_knn(fs, k1);
  const NeighborhoodMatrix s1 = build_s1(lists, fs.n());
  return build_final_s(s1, lists, expand_neighbors(lists, k2));
}

NeighborhoodMatrix build_from_labels(const LabelSet& labels) {
  labels.validate();
  const std::size_t n = labels.n();
  std::vector<std::pair<std::uint32_t, ItemIndex>> postings;
  for (std::size_t i = 0; i < n; ++i)
    for (std::uint32_t l : labels.labels[i]) postings.emplace_back(l, static_cast<ItemIndex>(i));
  std::sort(postings.begin(), postings.end());
  std::vector<NeighborhoodMatrix::Pair> pairs;
  for (std::size_t a = 0; a < postings.size();) {
    std::size_t b = a;
    while (b < postings.size() && postings[b].first == postings[a].first) ++b;
    for (std::size_t x = a; x < b; ++x)
      for (std::size_t y = x + 1; y < b; ++y)
        pairs.emplace_back(postings[x].second, postings[y].second);
    a = b;
  }
  return NeighborhoodMatrix(n, std::move(pairs));
}

double neighborhood_precision(const NeighborhoodMatrix& s, const LabelSet& labels) {
  labels.validate();
  if (labels.n() != s.n())
    throw InvalidArgument("neighborhood_precision: S has n=" + std::to_string(s.n()) +
                          " but labels cover " + std::to_string(labels.n()) + " items");
  if (s.pairs().empty()) throw InvalidArgument("undefined precision: no positive pairs");
  std::size_t hits = 0;
  for (const auto& [i, j] : s.pairs())
    if (labels_intersect(labels.labels[i], labels.labels[j])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(s.pairs().size());
}

}  // namespace bgan
