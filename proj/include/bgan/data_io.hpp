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

// File formats. Binary files share one layout: an 8-byte magic, a u32
// version, u64 dimension fields, then the little-endian payload. Labels and
// run configs are JSON text.
//
//   features     "BGANFEAT" v1 | n m | n x u64 ids | n*m f32
//   images       "BGANIMGS" v1 | n c h w | n x u64 ids | n*c*h*w f32
//   codes        "BGANCODE" v1 | n L | n x u64 ids | n*ceil(L/64) u64
//   neighborhood "BGANNBHD" v1 | n pairs | u32 diagonal flag | pairs x (u64 i, u64 j), i < j
//   checkpoint   "BGANCKPT" v1 | count | per tensor: u64 name length, name,
//                u64 rank, rank x u64 extents, f64 values

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "bgan/dataset.hpp"
#include "bgan/hashlayer.hpp"
#include "bgan/neighborhood.hpp"
#include "bgan/tensor.hpp"

namespace bgan {

inline constexpr std::uint32_t kFormatVersion = 1;

FeatureSet load_features(const std::filesystem::path& path);
void save_features(const FeatureSet& fs, const std::filesystem::path& path);

ImageSet load_images(const std::filesystem::path& path);
void save_images(const ImageSet& images, const std::filesystem::path& path);

LabelSet load_labels(const std::filesystem::path& path);
void save_labels(const LabelSet& labels, const std::filesystem::path& path);

CodeSet load_codes(const std::filesystem::path& path);
void save_codes(const CodeSet& codes, const std::filesystem::path& path);

NeighborhoodMatrix load_neighborhood(const std::filesystem::path& path);
void save_neighborhood(const NeighborhoodMatrix& s, const std::filesystem::path& path);

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;
NamedTensors load_tensors(const std::filesystem::path& path);
void save_tensors(const NamedTensors& tensors, const std::filesystem::path& path);

/// In-memory encoders behind the savers, exposed for byte-level tests.
std::vector<std::uint8_t> encode_features(const FeatureSet& fs);
FeatureSet decode_features(const std::vector<std::uint8_t>& bytes, const std::string& origin);

std::string labels_to_json(const LabelSet& labels);
LabelSet labels_from_json(const std::string& text);

struct SyntheticDataset {
  ImageSet images;
  FeatureSet features;
  LabelSet labels;
};

/// Desk-scale stand-in for a labelled image corpus. Each class is an
/// oriented sinusoidal grating with its own orientation and frequency; items
/// jitter phase and amplitude and add pixel noise. Features are the
/// flattened, centred images plus independent feature noise. Items are
/// interleaved by class (item i has class i % n_classes) and ids are 0..N-1.
SyntheticDataset make_synthetic_dataset(std::uint64_t seed, std::size_t n_per_class,
                                        std::size_t n_classes,
                                        std::array<std::size_t, 3> image_shape);

}  // namespace bgan
