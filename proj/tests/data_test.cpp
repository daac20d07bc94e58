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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "chromaskew/color.hpp"
#include "chromaskew/data.hpp"
#include "chromaskew/image_io.hpp"
#include "chromaskew/rng.hpp"

namespace chromaskew::data {
namespace {

std::vector<std::uint8_t> synthetic_records(std::size_t n, std::size_t label_bytes,
                                            std::uint8_t label) {
  std::vector<std::uint8_t> bytes;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t l = 0; l < label_bytes; ++l) {
      bytes.push_back(static_cast<std::uint8_t>(label + l + r));
    }
    for (std::size_t k = 0; k < kCifarPixels; ++k) {
      bytes.push_back(static_cast<std::uint8_t>((k * 7 + r) % 256));
    }
  }
  return bytes;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("chromaskew_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

TEST(DataTest, DecodeCifar10Layout) {
  const auto bytes = synthetic_records(3, 1, 4);
  const auto d = decode_cifar10(bytes);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.classes, 10);
  EXPECT_EQ(d.samples[1].label, 5);
  const Image& img = d.samples[0].image;
  EXPECT_EQ(img.height, 32);
  // Planar R, G, B with row-major pixels.
  EXPECT_FLOAT_EQ(img.at(0, 1, 0), 7.0f / 255.0f);
  EXPECT_FLOAT_EQ(img.at(0, 0, 1), static_cast<float>((1024 * 7) % 256) / 255.0f);
  EXPECT_EQ(decode_cifar10(bytes, 2).size(), 2u);
  EXPECT_EQ(encode_cifar10(d), bytes);
}

TEST(DataTest, DecodeRejectsMalformedInput) {
  auto bytes = synthetic_records(2, 1, 0);
  bytes.pop_back();
  EXPECT_THROW(decode_cifar10(bytes), DataError);
  EXPECT_THROW(decode_cifar10(synthetic_records(1, 1, 10)), DataError);
  EXPECT_EQ(decode_cifar10(std::vector<std::uint8_t>{}).size(), 0u);
}

TEST(DataTest, DecodeCifar100Labels) {
  const auto bytes = synthetic_records(2, 2, 3);
  const auto coarse = decode_cifar100(bytes, Cifar100Label::kCoarse);
  const auto fine = decode_cifar100(bytes, Cifar100Label::kFine);
  EXPECT_EQ(coarse.classes, 20);
  EXPECT_EQ(fine.classes, 100);
  EXPECT_EQ(coarse.samples[0].label, 3);
  EXPECT_EQ(fine.samples[0].label, 4);
  EXPECT_THROW(decode_cifar100(synthetic_records(1, 2, 25), Cifar100Label::kCoarse), DataError);
}

TEST(DataTest, LoadCifar10FromDirectoryAndFile) {
  const auto dir = temp_dir("cifar");
  for (int i = 1; i <= 5; ++i) {
    write_bytes(dir / ("data_batch_" + std::to_string(i) + ".bin"),
                synthetic_records(2, 1, static_cast<std::uint8_t>(i)));
  }
  write_bytes(dir / "test_batch.bin", synthetic_records(3, 1, 0));
  EXPECT_EQ(load_cifar10(dir).size(), 10u);
  EXPECT_EQ(load_cifar10(dir, 5).size(), 5u);
  EXPECT_EQ(load_cifar10(dir, 5).samples[4].label, 3);
  EXPECT_EQ(load_cifar10(dir, std::nullopt, Split::kTest).size(), 3u);
  EXPECT_EQ(load_cifar10(dir / "test_batch.bin").size(), 3u);
  EXPECT_THROW(load_cifar10(dir / "missing.bin"), DataError);
  std::filesystem::remove(dir / "data_batch_3.bin");
  EXPECT_THROW(load_cifar10(dir), DataError);
  std::filesystem::remove_all(dir);
}

TEST(DataTest, EncodeRejectsUnrepresentablePixels) {
  LabeledDataset d;
  d.classes = 10;
  d.samples.push_back({Image::filled(32, 32, 0.5f, 0.5f, 0.5f), 1});
  EXPECT_THROW(encode_cifar10(d), std::invalid_argument);
  d.samples[0].image = Image(8, 8);
  EXPECT_THROW(encode_cifar10(d), std::invalid_argument);
}

TEST(DataTest, ShapesAreDeterministicAndWellFormed) {
  const auto a = generate_shapes(40, 10, 32, 7);
  const auto b = generate_shapes(40, 10, 32, 7);
  const auto c = generate_shapes(40, 10, 32, 8);
  ASSERT_EQ(a.size(), 40u);
  ASSERT_EQ(a.masks.size(), 40u);
  EXPECT_NO_THROW(a.validate());
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.samples[i].label, static_cast<int>(i % 10));
    EXPECT_EQ(a.samples[i].image, b.samples[i].image);
    any_diff |= !(a.samples[i].image == c.samples[i].image);
    const Image& img = a.samples[i].image;
    EXPECT_GE(img.pixels.minCoeff(), 0.0f);
    EXPECT_LE(img.pixels.maxCoeff(), 1.0f);
    const Mask& m = a.masks[i];
    EXPECT_GT(m.count(), 20);
    EXPECT_LT(m.count(), 32 * 32 - 100);
    // Uniform foreground and background, separated by at least 10 dE00.
    Index fg = -1, bg = -1;
    for (Index p = 0; p < 32 * 32; ++p) (m.data()[p] ? fg : bg) = p;
    const color::Rgb f{img.pixels(fg, 0), img.pixels(fg, 1), img.pixels(fg, 2)};
    const color::Rgb g{img.pixels(bg, 0), img.pixels(bg, 1), img.pixels(bg, 2)};
    EXPECT_GE(color::delta_e2000(f, g), 10.0);
  }
  EXPECT_TRUE(any_diff);
  EXPECT_THROW(generate_shapes(4, 11, 32, 1), std::invalid_argument);
  EXPECT_THROW(generate_shapes(4, 1, 32, 1), std::invalid_argument);
}

TEST(DataTest, ShapeMasksDifferAcrossClasses) {
  std::set<std::vector<bool>> distinct;
  for (int cls = 0; cls < kShapeCount; ++cls) {
    const Mask m = shape_mask(cls, 32, 16.0, 16.0, 9.0);
    distinct.insert(std::vector<bool>(m.data(), m.data() + m.size()));
    EXPECT_GT(m.count(), 0) << shape_name(cls);
  }
  EXPECT_EQ(distinct.size(), static_cast<std::size_t>(kShapeCount));
}

void expect_exact_cover(const std::vector<std::vector<std::size_t>>& parts, std::size_t n) {
  std::vector<std::size_t> all;
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(n);
  std::iota(expected.begin(), expected.end(), std::size_t{0});
  EXPECT_EQ(all, expected);
}

TEST(DataTest, PartitionProperties) {
  Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 20 + rng.index(200);
    const std::size_t clients = 1 + rng.index(12);
    const auto d = generate_shapes(n, 10, 16, t);
    for (auto mode : {PartitionMode::kIid, PartitionMode::kLabelSkew}) {
      const auto parts = partition_indices(d, clients, mode, 11);
      ASSERT_EQ(parts.size(), clients);
      expect_exact_cover(parts, n);
      std::size_t lo = n, hi = 0;
      for (const auto& p : parts) {
        lo = std::min(lo, p.size());
        hi = std::max(hi, p.size());
      }
      EXPECT_LE(hi - lo, 1u);
      EXPECT_EQ(parts, partition_indices(d, clients, mode, 11));
    }
  }
}

TEST(DataTest, LabelSkewConcentratesDominantClasses) {
  const auto d = generate_shapes(1000, 10, 16, 1);
  const auto parts = partition(d, 5, PartitionMode::kLabelSkew, 2);
  for (std::size_t c = 0; c < parts.size(); ++c) {
    const auto h = label_histogram(parts[c]);
    std::size_t dominant = 0;
    for (const auto& [label, count] : h) {
      if (label == static_cast<int>(2 * c) || label == static_cast<int>(2 * c + 1)) {
        dominant += count;
      }
    }
    EXPECT_GE(static_cast<double>(dominant), 0.8 * static_cast<double>(parts[c].size()));
    EXPECT_EQ(parts[c].masks.size(), parts[c].size());
  }
  EXPECT_EQ(parse_partition_mode(to_string(PartitionMode::kLabelSkew)), PartitionMode::kLabelSkew);
  EXPECT_THROW(parse_partition_mode("dirichlet"), std::invalid_argument);
  EXPECT_THROW(partition_indices(head(d, 3), 4, PartitionMode::kIid, 1), std::invalid_argument);
  EXPECT_THROW(partition_indices(d, 0, PartitionMode::kIid, 1), std::invalid_argument);
}

TEST(DataTest, ImageIoRoundTrip) {
  const auto d = generate_shapes(1, 10, 16, 4);
  const auto dir = temp_dir("ppm");
  save_ppm(dir / "x.ppm", d.samples[0].image);
  const Image back = load_ppm(dir / "x.ppm");
  ASSERT_TRUE(back.same_size(d.samples[0].image));
  EXPECT_LE((back.pixels - d.samples[0].image.pixels).abs().maxCoeff(), 0.5f / 255.0f + 1e-6f);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace chromaskew::data
