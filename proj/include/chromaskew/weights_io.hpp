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

#ifndef CHROMASKEW_WEIGHTS_IO_HPP_
#define CHROMASKEW_WEIGHTS_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "chromaskew/tensor.hpp"

namespace chromaskew {

// Binary weight container:
//   "CDWT" | version u32 | tensor count u32 |
//   per tensor: rank u32 | dims u32[rank] | payload float32[prod(dims)]
// All integers and floats little-endian.
inline constexpr std::uint32_t kWeightsFormatVersion = 1;

void write_weights(std::ostream& out, const ModelWeights& weights);
ModelWeights read_weights(std::istream& in);

void save_weights(const std::filesystem::path& path, const ModelWeights& weights);
ModelWeights load_weights(const std::filesystem::path& path);

}  // namespace chromaskew

#endif  // CHROMASKEW_WEIGHTS_IO_HPP_
