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

#include "bgan/data_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "bgan/error.hpp"
#include "bgan/random.hpp"

namespace bgan {

namespace {

using Bytes = std::vector<std::uint8_t>;

constexpr std::size_t kMagicSize = 8;

class Writer {
 public:
  void magic(const char (&m)[kMagicSize + 1]) {
    bytes_.insert(bytes_.end(), m, m + kMagicSize);
    u32(kFormatVersion);
  }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const std::string& s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  Bytes take() { return std::move(bytes_); }

 private:
  void put(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  Bytes bytes_;
};

class Reader {
 public:
  Reader(const Bytes& bytes, std::string origin) : bytes_(bytes), origin_(std::move(origin)) {}

  void magic(const char (&m)[kMagicSize + 1]) {
    if (bytes_.size() < kMagicSize || std::memcmp(bytes_.data(), m, kMagicSize) != 0)
      fail(0, std::string("malformed header: expected magic ") + m);
    pos_ = kMagicSize;
    const std::size_t at = pos_;
    const std::uint32_t version = u32();
    if (version != kFormatVersion)
      fail(at, "malformed header: unsupported version " + std::to_string(version));
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  float f32() {
    const std::size_t at = pos_;
    const float v = std::bit_cast<float>(u32());
    if (!std::isfinite(v)) fail(at, "non-finite value");
    return v;
  }
  double f64() {
    const std::size_t at = pos_;
    const double v = std::bit_cast<double>(u64());
    if (!std::isfinite(v)) fail(at, "non-finite value");
    return v;
  }
  std::string raw(std::size_t n) {
    need(n);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  /// Validates that `count` items of `width` bytes follow, without overflow.
  void expect_payload(std::uint64_t count, std::size_t width) {
    if (count != 0 && count > (bytes_.size() - pos_) / width)
      fail(pos_, "truncated payload: dimensions declare " + std::to_string(count) + " x " +
                     std::to_string(width) + " bytes but only " +
                     std::to_string(bytes_.size() - pos_) + " remain");
  }
  void finish() {
    if (pos_ != bytes_.size())
      fail(pos_, "declared dimensions disagree with payload length (" +
                     std::to_string(bytes_.size() - pos_) + " trailing bytes)");
  }
  std::size_t pos() const noexcept { return pos_; }
  [[noreturn]] void fail(std::size_t offset, const std::string& what) const {
    throw IoError(origin_ + ": " + what + " at byte offset " + std::to_string(offset));
  }

 private:
  void need(std::size_t n) {
    if (bytes_.size() - pos_ < n) fail(pos_, "truncated payload");
  }
  std::uint64_t get(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  const Bytes& bytes_;
  std::string origin_;
  std::size_t pos_ = 0;
};

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, Bytes(text.begin(), text.end()));
}

std::vector<ItemId> read_ids(Reader& r, std::uint64_t n) {
  r.expect_payload(n, 8);
  std::vector<ItemId> ids(n);
  for (auto& id : ids) id = r.u64();
  return ids;
}

void reject_duplicate_ids(const Reader& r, const std::vector<ItemId>& ids, std::size_t offset) {
  try {
    (void)index_by_id(ids);
  } catch (const InvalidArgument& e) {
    r.fail(offset, e.what());
  }
}

std::uint64_t checked_mul(const Reader& r, std::uint64_t a, std::uint64_t b, std::size_t at) {
  if (a != 0 && b > ~std::uint64_t{0} / a) r.fail(at, "dimension product overflows");
  return a * b;
}

}  // namespace

// -- features ---------------------------------------------------------------

std::vector<std::uint8_t> encode_features(const FeatureSet& fs) {
  fs.validate();
  Writer w;
  w.magic("BGANFEAT");
  w.u64(fs.n());
  w.u64(fs.m);
  for (ItemId id : fs.ids) w.u64(id);
  for (float v : fs.data) w.f32(v);
  return w.take();
}

FeatureSet decode_features(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
  Reader r(bytes, origin);
  r.magic("BGANFEAT");
  const std::size_t dims_at = r.pos();
  FeatureSet fs;
  const std::uint64_t n = r.u64();
  fs.m = r.u64();
  if (n == 0) r.fail(dims_at, "empty feature set");
  if (fs.m == 0) r.fail(dims_at + 8, "feature dimensionality must be >= 1");
  const std::size_t ids_at = r.pos();
  fs.ids = read_ids(r, n);
  reject_duplicate_ids(r, fs.ids, ids_at);
  const std::uint64_t count = checked_mul(r, n, fs.m, dims_at);
  r.expect_payload(count, 4);
  fs.data.resize(count);
  for (auto& v : fs.data) v = r.f32();
  r.finish();
  return fs;
}

FeatureSet load_features(const std::filesystem::path& path) {
  return decode_features(read_file(path), path.string());
}

void save_features(const FeatureSet& fs, const std::filesystem::path& path) {
  write_file(path, encode_features(fs));
}

// -- images -----------------------------------------------------------------

ImageSet load_images(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  Reader r(bytes, path.string());
  r.magic("BGANIMGS");
  const std::size_t dims_at = r.pos();
  ImageSet images;
  const std::uint64_t n = r.u64();
  images.channels = r.u64();
  images.height = r.u64();
  images.width = r.u64();
  if (n == 0) r.fail(dims_at, "empty image set");
  if (images.channels == 0 || images.height == 0 || images.width == 0)
    r.fail(dims_at + 8, "image extents must be >= 1");
  const std::size_t ids_at = r.pos();
  images.ids = read_ids(r, n);
  reject_duplicate_ids(r, images.ids, ids_at);
  const std::uint64_t per = checked_mul(r, checked_mul(r, images.channels, images.height, dims_at),
                                        images.width, dims_at);
  const std::uint64_t count = checked_mul(r, n, per, dims_at);
  r.expect_payload(count, 4);
  images.pixels.resize(count);
  for (auto& v : images.pixels) {
    const std::size_t at = r.pos();
    v = r.f32();
    if (v < 0.0f || v > 1.0f) r.fail(at, "pixel value outside [0,1]");
  }
  r.finish();
  return images;
}

void save_images(const ImageSet& images, const std::filesystem::path& path) {
  images.validate();
  Writer w;
  w.magic("BGANIMGS");
  w.u64(images.n());
  w.u64(images.channels);
  w.u64(images.height);
  w.u64(images.width);
  for (ItemId id : images.ids) w.u64(id);
  for (float v : images.pixels) w.f32(v);
  write_file(path, w.take());
}

// -- labels -----------------------------------------------------------------

std::string labels_to_json(const LabelSet& labels) {
  labels.validate();
  nlohmann::json items = nlohmann::json::array();
  for (std::size_t i = 0; i < labels.n(); ++i)
    items.push_back({{"id", labels.ids[i]}, {"labels", labels.labels[i]}});
  return nlohmann::json{{"format", "bgan-labels"}, {"version", kFormatVersion}, {"items", items}}
             .dump(1) + "\n";
}

LabelSet labels_from_json(const std::string& text) {
  LabelSet labels;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", std::string()) != "bgan-labels")
      throw IoError("label file: missing format tag 'bgan-labels'");
    for (const auto& item : j.at("items")) {
      labels.ids.push_back(item.at("id").get<ItemId>());
      auto l = item.at("labels").get<std::vector<std::uint32_t>>();
      std::sort(l.begin(), l.end());
      l.erase(std::unique(l.begin(), l.end()), l.end());
      labels.labels.push_back(std::move(l));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("label file: ") + e.what());
  }
  try {
    labels.validate();
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("label file: ") + e.what());
  }
  return labels;
}

LabelSet load_labels(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  try {
    return labels_from_json(std::string(bytes.begin(), bytes.end()));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void save_labels(const LabelSet& labels, const std::filesystem::path& path) {
  write_text(path, labels_to_json(labels));
}

// -- codes ------------------------------------------------------------------

CodeSet load_codes(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  Reader r(bytes, path.string());
  r.magic("BGANCODE");
  const std::size_t dims_at = r.pos();
  CodeSet codes;
  const std::uint64_t n = r.u64();
  codes.bits = r.u64();
  if (codes.bits == 0) r.fail(dims_at + 8, "code length must be >= 1");
  const std::size_t ids_at = r.pos();
  codes.ids = read_ids(r, n);
  reject_duplicate_ids(r, codes.ids, ids_at);
  const std::uint64_t count = checked_mul(r, n, codes.words_per_code(), dims_at);
  r.expect_payload(count, 8);
  codes.words.resize(count);
  for (auto& w : codes.words) w = r.u64();
  r.finish();
  try {
    codes.validate();
  } catch (const InvalidArgument& e) {
    r.fail(ids_at + 8 * n, e.what());
  }
  return codes;
}

void save_codes(const CodeSet& codes, const std::filesystem::path& path) {
  codes.validate();
  Writer w;
  w.magic("BGANCODE");
  w.u64(codes.n());
  w.u64(codes.bits);
  for (ItemId id : codes.ids) w.u64(id);
  for (std::uint64_t word : codes.words) w.u64(word);
  write_file(path, w.take());
}

// -- neighborhood -----------------------------------------------------------

NeighborhoodMatrix load_neighborhood(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  Reader r(bytes, path.string());
  r.magic("BGANNBHD");
  const std::uint64_t n = r.u64();
  const std::uint64_t count = r.u64();
  const std::size_t flag_at = r.pos();
  if (r.u32() != 1) r.fail(flag_at, "unsupported diagonal convention");
  r.expect_payload(count, 16);
  std::vector<NeighborhoodMatrix::Pair> pairs;
  pairs.reserve(count);
  NeighborhoodMatrix::Pair prev{0, 0};
  for (std::uint64_t p = 0; p < count; ++p) {
    const std::size_t at = r.pos();
    const std::uint64_t i = r.u64(), j = r.u64();
    if (!(i < j) || j >= n) r.fail(at, "pair must satisfy i < j < n");
    const NeighborhoodMatrix::Pair cur{static_cast<ItemIndex>(i), static_cast<ItemIndex>(j)};
    if (p > 0 && !(prev < cur)) r.fail(at, "pairs must be strictly ascending");
    pairs.push_back(cur);
    prev = cur;
  }
  r.finish();
  return NeighborhoodMatrix(n, std::move(pairs));
}

void save_neighborhood(const NeighborhoodMatrix& s, const std::filesystem::path& path) {
  Writer w;
  w.magic("BGANNBHD");
  w.u64(s.n());
  w.u64(s.pairs().size());
  w.u32(s.diagonal_positive() ? 1 : 0);
  for (const auto& [i, j] : s.pairs()) {
    w.u64(i);
    w.u64(j);
  }
  write_file(path, w.take());
}

// -- tensors ----------------------------------------------------------------

NamedTensors load_tensors(const std::filesystem::path& path) {
  const Bytes bytes = read_file(path);
  Reader r(bytes, path.string());
  r.magic("BGANCKPT");
  const std::uint64_t count = r.u64();
  NamedTensors out;
  for (std::uint64_t t = 0; t < count; ++t) {
    const std::size_t at = r.pos();
    const std::uint64_t name_len = r.u64();
    r.expect_payload(name_len, 1);
    std::string name = r.raw(name_len);
    const std::uint64_t rank = r.u64();
    if (rank > 8) r.fail(at, "tensor rank too large");
    Shape shape(rank);
    std::uint64_t numel = 1;
    for (auto& d : shape) {
      d = r.u64();
      numel = checked_mul(r, numel, d, at);
    }
    r.expect_payload(numel, 8);
    std::vector<double> values(numel);
    for (auto& v : values) v = r.f64();
    out.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  r.finish();
  return out;
}

void save_tensors(const NamedTensors& tensors, const std::filesystem::path& path) {
  Writer w;
  w.magic("BGANCKPT");
  w.u64(tensors.size());
  for (const auto& [name, t] : tensors) {
    w.u64(name.size());
    w.raw(name);
    w.u64(t.rank());
    for (std::size_t d : t.shape()) w.u64(d);
    for (double v : t.values()) w.f64(v);
  }
  write_file(path, w.take());
}

// -- synthetic data ---------------------------------------------------------

SyntheticDataset make_synthetic_dataset(std::uint64_t seed, std::size_t n_per_class,
                                        std::size_t n_classes,
                                        std::array<std::size_t, 3> image_shape) {
  if (n_classes < 2) throw InvalidArgument("synthetic dataset needs at least 2 classes");
  if (n_per_class < 1) throw InvalidArgument("synthetic dataset needs n_per_class >= 1");
  const auto [channels, height, width] = image_shape;
  if (channels == 0 || height == 0 || width == 0)
    throw InvalidArgument("synthetic dataset: image extents must be >= 1");

  constexpr double kPi = std::numbers::pi;
  constexpr double kPixelNoise = 0.05;
  constexpr double kFeatureNoise = 0.05;
  const std::size_t n = n_per_class * n_classes;
  const std::size_t pixels = channels * height * width;

  SyntheticDataset out;
  out.images.channels = channels;
  out.images.height = height;
  out.images.width = width;
  out.images.pixels.resize(n * pixels);
  out.features.m = pixels;
  out.features.data.resize(n * pixels);

  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = i % n_classes;
    const double angle = kPi * static_cast<double>(cls) / static_cast<double>(n_classes);
    const double cycles = 1.5 + 0.75 * static_cast<double>(cls % 3);
    const double phase = rng.uniform(-0.35, 0.35);
    const double amplitude = rng.uniform(0.3, 0.4);
    const double dx = std::cos(angle), dy = std::sin(angle);
    float* img = out.images.pixels.data() + i * pixels;
    float* feat = out.features.data.data() + i * pixels;
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
          const double u = (static_cast<double>(x) + 0.5) / static_cast<double>(width) - 0.5;
          const double v = (static_cast<double>(y) + 0.5) / static_cast<double>(height) - 0.5;
          const double wave = std::sin(2.0 * kPi * cycles * (u * dx + v * dy) + phase +
                                       0.5 * static_cast<double>(c));
          double p = 0.5 + amplitude * wave + kPixelNoise * rng.normal();
          p = std::clamp(p, 0.0, 1.0);
          const std::size_t idx = (c * height + y) * width + x;
          img[idx] = static_cast<float>(p);
          feat[idx] = static_cast<float>(p - 0.5 + kFeatureNoise * rng.normal());
        }
    out.images.ids.push_back(i);
    out.features.ids.push_back(i);
    out.labels.ids.push_back(i);
    out.labels.labels.push_back({static_cast<std::uint32_t>(cls)});
  }
  return out;
}

}  // namespace bgan
