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

#ifndef CHROMASKEW_DATA_HPP_
#define CHROMASKEW_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chromaskew/dataset.hpp"

namespace chromaskew::data {

// Thrown for unreadable or malformed dataset files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr Index kCifarSide = 32;
inline constexpr std::size_t kCifarPixels = 3 * 32 * 32;
inline constexpr std::size_t kCifar10Record = 1 + kCifarPixels;
inline constexpr std::size_t kCifar100Record = 2 + kCifarPixels;

// Decode a buffer of CIFAR-10 records (label byte, then 1024 R, G, B bytes
// each in row-major order). At most `limit` records are decoded, front first.
LabeledDataset decode_cifar10(std::span<const std::uint8_t> bytes,
                              std::optional<std::size_t> limit = std::nullopt);

// CIFAR-100 records carry a coarse and a fine label byte.
enum class Cifar100Label { kCoarse, kFine };
LabeledDataset decode_cifar100(std::span<const std::uint8_t> bytes, Cifar100Label which,
                               std::optional<std::size_t> limit = std::nullopt);

// Inverse of decode_cifar10 for datasets whose pixels are multiples of 1/255.
std::vector<std::uint8_t> encode_cifar10(const LabeledDataset& dataset);

enum class Split { kTrain, kTest };

// `path` is either one batch file or the extracted cifar-10-batches-bin
// directory, in which case the split picks data_batch_1..5 or test_batch.
LabeledDataset load_cifar10(const std::filesystem::path& path,
                            std::optional<std::size_t> limit = std::nullopt,
                            Split split = Split::kTrain);

LabeledDataset load_cifar100(const std::filesystem::path& path, Cifar100Label which,
                             std::optional<std::size_t> limit = std::nullopt);

inline constexpr int kShapeCount = 10;
// Shape names indexed by class id.
const char* shape_name(int cls);

// Mask of shape `cls` centered at (cy, cx) with half-extent `radius`.
Mask shape_mask(int cls, Index size, double cy, double cx, double radius);

// Seeded synthetic dataset: one shape per class on a uniform background.
// Foreground hue is cls/classes plus a small jitter; the background is
// redrawn until its CIEDE2000 distance from the foreground is at least 10.
// Ground-truth shape masks are returned in `masks`.
LabeledDataset generate_shapes(std::size_t n, int classes, Index size, std::uint64_t seed);

enum class PartitionMode { kIid, kLabelSkew };
std::string to_string(PartitionMode mode);
PartitionMode parse_partition_mode(const std::string& name);

// Per-client index lists into the source dataset. Every index appears in
// exactly one list.
std::vector<std::vector<std::size_t>> partition_indices(const LabeledDataset& dataset,
                                                        std::size_t clients,
                                                        PartitionMode mode,
                                                        std::uint64_t seed);

std::vector<LabeledDataset> partition(const LabeledDataset& dataset, std::size_t clients,
                                      PartitionMode mode, std::uint64_t seed);

LabeledDataset subset(const LabeledDataset& dataset, std::span<const std::size_t> indices);

// First `count` samples (all if fewer).
LabeledDataset head(const LabeledDataset& dataset, std::size_t count);

std::map<int, std::size_t> label_histogram(const LabeledDataset& dataset);

}  // namespace chromaskew::data

#endif  // CHROMASKEW_DATA_HPP_
