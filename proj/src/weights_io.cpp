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

#include "chromaskew/weights_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace chromaskew {
namespace {

constexpr std::array<char, 4> kMagic{'C', 'D', 'W', 'T'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff),
                         static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
    throw std::runtime_error("weights: unexpected end of stream");
  }
  return static_cast<std::uint32_t>(bytes[0]) |
         (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) |
         (static_cast<std::uint32_t>(bytes[3]) << 24);
}

}  // namespace

void write_weights(std::ostream& out, const ModelWeights& weights) {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kWeightsFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(weights.size()));
  for (const auto& t : weights) {
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (Index d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    for (Index i = 0; i < t.size(); ++i) {
      put_u32(out, std::bit_cast<std::uint32_t>(t[i]));
    }
  }
  if (!out) throw std::runtime_error("weights: write failed");
}

ModelWeights read_weights(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw std::runtime_error("weights: bad magic (expected CDWT)");
  }
  const std::uint32_t version = get_u32(in);
  if (version != kWeightsFormatVersion) {
    throw std::runtime_error("weights: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = get_u32(in);
  ModelWeights weights;
  weights.reserve(count);
  for (std::uint32_t n = 0; n < count; ++n) {
    const std::uint32_t rank = get_u32(in);
    if (rank == 0 || rank > 8) {
      throw std::runtime_error("weights: implausible tensor rank " + std::to_string(rank));
    }
    Shape shape(rank);
    for (auto& d : shape) d = get_u32(in);
    Tensor<float> t(shape);
    for (Index i = 0; i < t.size(); ++i) {
      t[i] = std::bit_cast<float>(get_u32(in));
    }
    weights.push_back(std::move(t));
  }
  return weights;
}

void save_weights(const std::filesystem::path& path, const ModelWeights& weights) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_weights(out, weights);
}

ModelWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_weights(in);
}

}  // namespace chromaskew
