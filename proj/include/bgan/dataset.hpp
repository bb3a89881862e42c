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

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace bgan {

using ItemId = std::uint64_t;

/// n x m real-valued feature vectors, one row per item.
struct FeatureSet {
  std::vector<ItemId> ids;
  std::size_t m = 0;
  std::vector<float> data;  // row-major n x m

  std::size_t n() const noexcept { return ids.size(); }
  std::span<const float> row(std::size_t i) const { return {data.data() + i * m, m}; }

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;
  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

/// n images of shape channels x height x width, pixel values in [0, 1].
struct ImageSet {
  std::vector<ItemId> ids;
  std::size_t channels = 0, height = 0, width = 0;
  std::vector<float> pixels;  // n x C x H x W

  std::size_t n() const noexcept { return ids.size(); }
  std::size_t image_size() const noexcept { return channels * height * width; }
  std::span<const float> image(std::size_t i) const {
    return {pixels.data() + i * image_size(), image_size()};
  }

  void validate() const;
  friend bool operator==(const ImageSet&, const ImageSet&) = default;
};

/// Per-item sets of class/concept identifiers (multi-label allowed).
/// Label lists are kept sorted and duplicate-free.
struct LabelSet {
  std::vector<ItemId> ids;
  std::vector<std::vector<std::uint32_t>> labels;

  std::size_t n() const noexcept { return ids.size(); }

  void validate() const;
  friend bool operator==(const LabelSet&, const LabelSet&) = default;
};

/// id -> row position; throws InvalidArgument on duplicate ids.
std::unordered_map<ItemId, std::size_t> index_by_id(std::span<const ItemId> ids);

/// true iff the two sorted label lists share an element.
bool labels_intersect(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

/// Rows of a subset, in the given order.
FeatureSet select_rows(const FeatureSet& fs, std::span<const std::size_t> rows);
ImageSet select_rows(const ImageSet& images, std::span<const std::size_t> rows);
LabelSet select_rows(const LabelSet& labels, std::span<const std::size_t> rows);

}  // namespace bgan
