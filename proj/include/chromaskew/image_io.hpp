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

#ifndef CHROMASKEW_IMAGE_IO_HPP_
#define CHROMASKEW_IMAGE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "chromaskew/image.hpp"
#include "chromaskew/saliency.hpp"

namespace chromaskew {

// [0,1] -> byte with clamping and round-half-up.
std::uint8_t quantize(double v);

// Binary PPM (P6, maxval 255) and PGM (P5, maxval 255).
void write_ppm(std::ostream& out, const Image& image);
Image read_ppm(std::istream& in);
void save_ppm(const std::filesystem::path& path, const Image& image);
Image load_ppm(const std::filesystem::path& path);

void write_pgm(std::ostream& out, const saliency::SaliencyMap& map);
saliency::SaliencyMap read_pgm(std::istream& in);
void save_pgm(const std::filesystem::path& path, const saliency::SaliencyMap& map);

}  // namespace chromaskew

#endif  // CHROMASKEW_IMAGE_IO_HPP_
