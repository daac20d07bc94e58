/*
 * Copyright 2026 The chromaskew Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "chromaskew/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>

#include "chromaskew/color.hpp"
#include "chromaskew/rng.hpp"

namespace chromaskew {

void LabeledDataset::validate() const {
  if (classes < 2) throw std::invalid_argument("dataset needs at least 2 classes");
  for (const auto& s : samples) {
    if (!s.image.same_size(samples.front().image)) {
      throw std::invalid_argument("dataset images differ in size");
    }
    if (s.label < 0 || s.label >= classes) {
      throw std::invalid_argument("label " + std::to_string(s.label) +
                                  " out of range for " + std::to_string(classes) +
                                  " classes");
    }
  }
  if (!masks.empty() && masks.size() != samples.size()) {
    throw std::invalid_argument("mask count does not match sample count");
  }
}

namespace data {
namespace {

Image decode_pixels(const std::uint8_t* p) {
  Image img(kCifarSide, kCifarSide);
  constexpr std::size_t plane = kCifarSide * kCifarSide;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t k = 0; k < plane; ++k) {
      img.pixels(static_cast<Index>(k), static_cast<Index>(c)) =
          static_cast<float>(p[c * plane + k]) / 255.0f;
    }
  }
  return img;
}

LabeledDataset decode_records(std::span<const std::uint8_t> bytes, std::size_t label_bytes,
                              std::size_t label_index, int classes,
                              std::optional<std::size_t> limit) {
  const std::size_t record = label_bytes + kCifarPixels;
  if (bytes.size() % record != 0) {
    throw DataError("CIFAR data size " + std::to_string(bytes.size()) +
                    " is not a multiple of the " + std::to_string(record) +
                    "-byte record");
  }
  std::size_t count = bytes.size() / record;
  if (limit) count = std::min(count, *limit);
  LabeledDataset out;
  out.classes = classes;
  out.samples.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    const std::uint8_t* p = bytes.data() + r * record;
    const int label = p[label_index];
    if (label >= classes) {
      throw DataError("record " + std::to_string(r) + " has label " +
                      std::to_string(label) + " (max " + std::to_string(classes - 1) + ")");
    }
    out.samples.push_back(Sample{decode_pixels(p + label_bytes), label});
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void append(LabeledDataset& into, LabeledDataset&& more) {
  std::move(more.samples.begin(), more.samples.end(), std::back_inserter(into.samples));
}

std::uint8_t to_byte(float v) {
  const double scaled = static_cast<double>(v) * 255.0;
  const double rounded = std::floor(scaled + 0.5);
  if (v < 0.0f || v > 1.0f || std::abs(scaled - rounded) > 1e-3) {
    throw std::invalid_argument("pixel value is not representable as a byte");
  }
  return static_cast<std::uint8_t>(rounded);
}

}  // namespace

LabeledDataset decode_cifar10(std::span<const std::uint8_t> bytes,
                              std::optional<std::size_t> limit) {
  auto d = decode_records(bytes, 1, 0, 10, limit);
  d.name = "cifar10";
  d.provenance = Provenance::kCifar10;
  return d;
}

LabeledDataset decode_cifar100(std::span<const std::uint8_t> bytes, Cifar100Label which,
                               std::optional<std::size_t> limit) {
  const bool fine = which == Cifar100Label::kFine;
  auto d = decode_records(bytes, 2, fine ? 1 : 0, fine ? 100 : 20, limit);
  d.name = fine ? "cifar100-fine" : "cifar100-coarse";
  d.provenance = Provenance::kCifar100;
  return d;
}

std::vector<std::uint8_t> encode_cifar10(const LabeledDataset& dataset) {
  std::vector<std::uint8_t> out;
  out.reserve(dataset.size() * kCifar10Record);
  constexpr Index plane = kCifarSide * kCifarSide;
  for (const auto& s : dataset.samples) {
    if (s.image.height != kCifarSide || s.image.width != kCifarSide) {
      throw std::invalid_argument("CIFAR records hold 32x32 images");
    }
    if (s.label < 0 || s.label > 9) throw std::invalid_argument("CIFAR-10 label out of range");
    out.push_back(static_cast<std::uint8_t>(s.label));
    for (Index c = 0; c < 3; ++c) {
      for (Index k = 0; k < plane; ++k) out.push_back(to_byte(s.image.pixels(k, c)));
    }
  }
  return out;
}

LabeledDataset load_cifar10(const std::filesystem::path& path,
                            std::optional<std::size_t> limit, Split split) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    if (split == Split::kTest) {
      files.push_back(path / "test_batch.bin");
    } else {
      for (int i = 1; i <= 5; ++i) {
        files.push_back(path / ("data_batch_" + std::to_string(i) + ".bin"));
      }
    }
  } else {
    files.push_back(path);
  }
  LabeledDataset out;
  out.classes = 10;
  out.name = "cifar10";
  out.provenance = Provenance::kCifar10;
  for (const auto& f : files) {
    std::optional<std::size_t> remaining;
    if (limit) {
      if (out.size() >= *limit) break;
      remaining = *limit - out.size();
    }
    append(out, decode_cifar10(read_file(f), remaining));
  }
  return out;
}

LabeledDataset load_cifar100(const std::filesystem::path& path, Cifar100Label which,
                             std::optional<std::size_t> limit) {
  return decode_cifar100(read_file(path), which, limit);
}

const char* shape_name(int cls) {
  static constexpr const char* kNames[kShapeCount] = {
      "circle", "square", "triangle", "diamond", "cross",
      "ring", "hbar", "vbar", "inverted-triangle", "frame"};
  if (cls < 0 || cls >= kShapeCount) throw std::invalid_argument("no shape for class");
  return kNames[cls];
}

Mask shape_mask(int cls, Index size, double cy, double cx, double radius) {
  shape_name(cls);
  Mask m = Mask::Constant(size, size, false);
  const double r = radius;
  for (Index i = 0; i < size; ++i) {
    for (Index j = 0; j < size; ++j) {
      const double y = (i + 0.5 - cy) / r, x = (j + 0.5 - cx) / r;
      const double ax = std::abs(x), ay = std::abs(y);
      bool in = false;
      switch (cls) {
        case 0: in = x * x + y * y <= 1.0; break;
        case 1: in = ax <= 0.8 && ay <= 0.8; break;
        case 2: in = y >= -1.0 && y <= 0.8 && ax <= (y + 1.0) / 1.8 * 0.9; break;
        case 3: in = ax + ay <= 1.0; break;
        case 4: in = (ax <= 0.3 && ay <= 1.0) || (ay <= 0.3 && ax <= 1.0); break;
        case 5: in = x * x + y * y <= 1.0 && x * x + y * y >= 0.3; break;
        case 6: in = ax <= 1.0 && ay <= 0.35; break;
        case 7: in = ay <= 1.0 && ax <= 0.35; break;
        case 8: in = y <= 1.0 && y >= -0.8 && ax <= (1.0 - y) / 1.8 * 0.9; break;
        case 9: in = ax <= 0.9 && ay <= 0.9 && (ax >= 0.55 || ay >= 0.55); break;
      }
      m(i, j) = in;
    }
  }
  return m;
}

LabeledDataset generate_shapes(std::size_t n, int classes, Index size, std::uint64_t seed) {
  if (classes < 2 || classes > kShapeCount) {
    throw std::invalid_argument("shapes dataset supports 2..10 classes");
  }
  if (size < 16) throw std::invalid_argument("shapes image size must be >= 16");
  LabeledDataset out;
  out.classes = classes;
  out.name = "shapes";
  out.provenance = Provenance::kShapes;
  out.samples.reserve(n);
  out.masks.reserve(n);
  const double s = static_cast<double>(size);
  for (std::size_t k = 0; k < n; ++k) {
    Rng rng(derive_seed(seed, {k}));
    const int cls = static_cast<int>(k % static_cast<std::size_t>(classes));
    const double radius = s * rng.uniform(0.25, 0.32);
    const double cy = s / 2 + rng.uniform(-s / 10, s / 10);
    const double cx = s / 2 + rng.uniform(-s / 10, s / 10);
    const double hue = std::fmod(static_cast<double>(cls) / classes +
                                     rng.uniform(-0.02, 0.02) + 1.0, 1.0);
    const color::Rgb fg = color::hsv_to_rgb({hue, rng.uniform(0.7, 1.0), rng.uniform(0.7, 1.0)});
    color::Rgb bg{};
    for (int attempt = 0;; ++attempt) {
      if (attempt == 10000) throw std::logic_error("no background with enough contrast");
      bg = color::hsv_to_rgb({rng.uniform(), rng.uniform(0.0, 0.4), rng.uniform(0.15, 0.95)});
      if (color::delta_e2000(fg, bg) >= 10.0) break;
    }
    Mask mask = shape_mask(cls, size, cy, cx, radius);
    Image img(size, size);
    for (Index p = 0; p < size * size; ++p) {
      const auto& c = mask(p / size, p % size) ? fg : bg;
      for (Index ch = 0; ch < 3; ++ch) img.pixels(p, ch) = static_cast<float>(c[ch]);
    }
    out.samples.push_back(Sample{std::move(img), cls});
    out.masks.push_back(std::move(mask));
  }
  return out;
}

std::string to_string(PartitionMode mode) {
  return mode == PartitionMode::kIid ? "iid" : "label_skew";
}

PartitionMode parse_partition_mode(const std::string& name) {
  if (name == "iid") return PartitionMode::kIid;
  if (name == "label_skew") return PartitionMode::kLabelSkew;
  throw std::invalid_argument("unknown partition mode '" + name + "'");
}

std::vector<std::vector<std::size_t>> partition_indices(const LabeledDataset& dataset,
                                                        std::size_t clients,
                                                        PartitionMode mode,
                                                        std::uint64_t seed) {
  if (clients == 0) throw std::invalid_argument("partition needs at least one client");
  if (clients > dataset.size()) {
    throw std::invalid_argument("more clients (" + std::to_string(clients) +
                                ") than samples (" + std::to_string(dataset.size()) + ")");
  }
  const std::size_t n = dataset.size();
  std::vector<std::size_t> target(clients, n / clients);
  for (std::size_t i = 0; i < n % clients; ++i) ++target[i];

  std::vector<std::vector<std::size_t>> parts(clients);
  Rng rng(derive_seed(seed, {0x9a27}));
  if (mode == PartitionMode::kIid) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    std::size_t at = 0;
    for (std::size_t c = 0; c < clients; ++c) {
      parts[c].assign(order.begin() + static_cast<std::ptrdiff_t>(at),
                      order.begin() + static_cast<std::ptrdiff_t>(at + target[c]));
      at += target[c];
    }
    return parts;
  }

  const int classes = std::max(dataset.classes, 1);
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(classes));
  for (std::size_t i = 0; i < n; ++i) {
    by_class[static_cast<std::size_t>(dataset.samples[i].label)].push_back(i);
  }
  for (auto& list : by_class) rng.shuffle(list);
  std::vector<std::size_t> next(by_class.size(), 0);
  std::vector<char> taken(n, 0);
  for (std::size_t c = 0; c < clients; ++c) {
    const std::size_t dominant[2] = {(2 * c) % static_cast<std::size_t>(classes),
                                     (2 * c + 1) % static_cast<std::size_t>(classes)};
    const auto quota = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(target[c])));
    for (std::size_t k = 0, misses = 0; parts[c].size() < quota && misses < 2; ++k) {
      const std::size_t cls = dominant[k % 2];
      if (next[cls] < by_class[cls].size()) {
        const std::size_t idx = by_class[cls][next[cls]++];
        parts[c].push_back(idx);
        taken[idx] = 1;
        misses = 0;
      } else {
        ++misses;
      }
    }
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i) {
    if (!taken[i]) rest.push_back(i);
  }
  rng.shuffle(rest);
  std::size_t at = 0;
  for (std::size_t c = 0; c < clients; ++c) {
    while (parts[c].size() < target[c] && at < rest.size()) parts[c].push_back(rest[at++]);
  }
  // Clients whose dominant classes ran dry can leave leftovers.
  for (std::size_t c = 0; at < rest.size(); c = (c + 1) % clients) {
    parts[c].push_back(rest[at++]);
  }
  return parts;
}

LabeledDataset subset(const LabeledDataset& dataset, std::span<const std::size_t> indices) {
  LabeledDataset out;
  out.classes = dataset.classes;
  out.name = dataset.name;
  out.provenance = dataset.provenance;
  out.samples.reserve(indices.size());
  for (std::size_t i : indices) {
    out.samples.push_back(dataset.samples.at(i));
    if (!dataset.masks.empty()) out.masks.push_back(dataset.masks.at(i));
  }
  return out;
}

std::vector<LabeledDataset> partition(const LabeledDataset& dataset, std::size_t clients,
                                      PartitionMode mode, std::uint64_t seed) {
  std::vector<LabeledDataset> out;
  for (const auto& idx : partition_indices(dataset, clients, mode, seed)) {
    out.push_back(subset(dataset, idx));
  }
  return out;
}

LabeledDataset head(const LabeledDataset& dataset, std::size_t count) {
  std::vector<std::size_t> idx(std::min(count, dataset.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return subset(dataset, idx);
}

std::map<int, std::size_t> label_histogram(const LabeledDataset& dataset) {
  std::map<int, std::size_t> h;
  for (const auto& s : dataset.samples) ++h[s.label];
  return h;
}

}  // namespace data
}  // namespace chromaskew
