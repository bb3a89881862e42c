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

#include "bgan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bgan/error.hpp"

namespace bgan {

namespace {

void require_unique(std::span<const ItemId> ids, const char* what) {
  std::vector<ItemId> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidArgument(std::string(what) + ": duplicate item id");
}

}  // namespace

void FeatureSet::validate() const {
  if (ids.empty()) throw InvalidArgument("empty feature set");
  if (m == 0) throw InvalidArgument("feature dimensionality must be >= 1");
  if (data.size() != ids.size() * m)
    throw InvalidArgument("feature payload holds " + std::to_string(data.size()) +
                          " values, expected " + std::to_string(ids.size() * m));
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!std::isfinite(data[i]))
      throw InvalidArgument("non-finite feature value in row " + std::to_string(i / m));
  require_unique(ids, "feature set");
}

void ImageSet::validate() const {
  if (ids.empty()) throw InvalidArgument("empty image set");
  if (channels == 0 || height == 0 || width == 0)
    throw InvalidArgument("image extents must be >= 1");
  if (pixels.size() != ids.size() * image_size())
    throw InvalidArgument("image payload holds " + std::to_string(pixels.size()) +
                          " values, expected " + std::to_string(ids.size() * image_size()));
  for (std::size_t i = 0; i < pixels.size(); ++i)
    if (!(pixels[i] >= 0.0f && pixels[i] <= 1.0f))
      throw InvalidArgument("pixel outside [0,1] in image " +
                            std::to_string(i / image_size()));
  require_unique(ids, "image set");
}

void LabelSet::validate() const {
  if (labels.size() != ids.size())
    throw InvalidArgument("label set: " + std::to_string(ids.size()) + " ids but " +
                          std::to_string(labels.size()) + " label lists");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].empty())
      throw InvalidArgument("item " + std::to_string(ids[i]) + " has no labels");
    if (!std::is_sorted(labels[i].begin(), labels[i].end()) ||
        std::adjacent_find(labels[i].begin(), labels[i].end()) != labels[i].end())
      throw InvalidArgument("labels of item " + std::to_string(ids[i]) +
                            " must be sorted and unique");
  }
  require_unique(ids, "label set");
}

std::unordered_map<ItemId, std::size_t> index_by_id(std::span<const ItemId> ids) {
  std::unordered_map<ItemId, std::size_t> index;
  index.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (!index.emplace(ids[i], i).second)
      throw InvalidArgument("duplicate item id " + std::to_string(ids[i]));
  return index;
}

bool labels_intersect(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return true;
    if (a[i] < b[j]) ++i; else ++j;
  }
  return false;
}

FeatureSet select_rows(const FeatureSet& fs, std::span<const std::size_t> rows) {
  FeatureSet out;
  out.m = fs.m;
  out.ids.reserve(rows.size());
  out.data.reserve(rows.size() * fs.m);
  for (std::size_t r : rows) {
    out.ids.push_back(fs.ids.at(r));
    auto row = fs.row(r);
    out.data.insert(out.data.end(), row.begin(), row.end());
  }
  return out;
}

ImageSet select_rows(const ImageSet& images, std::span<const std::size_t> rows) {
  ImageSet out;
  out.channels = images.channels;
  out.height = images.height;
  out.width = images.width;
  out.ids.reserve(rows.size());
  for (std::size_t r : rows) {
    out.ids.push_back(images.ids.at(r));
    auto img = images.image(r);
    out.pixels.insert(out.pixels.end(), img.begin(), img.end());
  }
  return out;
}

LabelSet select_rows(const LabelSet& labels, std::span<const std::size_t> rows) {
  LabelSet out;
  for (std::size_t r : rows) {
    out.ids.push_back(labels.ids.at(r));
    out.labels.push_back(labels.labels.at(r));
  }
  return out;
}

}  // namespace bgan
