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

#ifndef CHROMASKEW_IMAGE_HPP_
#define CHROMASKEW_IMAGE_HPP_

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <utility>

#include "chromaskew/tensor.hpp"

namespace chromaskew {

// H x W x 3 color image with values in [0,1]. Pixels are stored one per row
// in row-major pixel order (row i*W + j), channels R,G,B in the columns.
struct Image {
  using Pixels = Eigen::Array<float, Eigen::Dynamic, 3, Eigen::RowMajor>;

  Index height = 0;
  Index width = 0;
  Pixels pixels;

  Image() = default;
  Image(Index h, Index w) : height(h), width(w), pixels(Pixels::Zero(h * w, 3)) {
    if (h < 1 || w < 1) throw std::invalid_argument("image dimensions must be >= 1");
  }
  Image(Index h, Index w, Pixels p) : height(h), width(w), pixels(std::move(p)) {
    if (pixels.rows() != h * w) {
      throw std::invalid_argument("image pixel count does not match " +
                                  std::to_string(h) + "x" + std::to_string(w));
    }
  }

  static Image filled(Index h, Index w, float r, float g, float b) {
    Image img(h, w);
    img.pixels.col(0).setConstant(r);
    img.pixels.col(1).setConstant(g);
    img.pixels.col(2).setConstant(b);
    return img;
  }

  float& at(Index i, Index j, Index c) { return pixels(i * width + j, c); }
  float at(Index i, Index j, Index c) const { return pixels(i * width + j, c); }

  bool same_size(const Image& other) const {
    return height == other.height && width == other.width;
  }

  friend bool operator==(const Image& a, const Image& b) {
    return a.same_size(b) && (a.pixels == b.pixels).all();
  }
};

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// HWC image -> [3,H,W] tensor.
template <typename Scalar>
Tensor<Scalar> to_chw(const Image& image) {
  Tensor<Scalar> t(Shape{3, image.height, image.width});
  auto m = t.matrix(3, image.height * image.width);
  m = image.pixels.transpose().matrix().template cast<Scalar>();
  return t;
}

}  // namespace chromaskew

#endif  // CHROMASKEW_IMAGE_HPP_
