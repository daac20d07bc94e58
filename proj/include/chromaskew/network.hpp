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

#ifndef CHROMASKEW_NETWORK_HPP_
#define CHROMASKEW_NETWORK_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chromaskew/image.hpp"
#include "chromaskew/ops.hpp"
#include "chromaskew/tape.hpp"
#include "chromaskew/tensor.hpp"

namespace chromaskew {

enum class LayerKind { kConv, kRelu, kMaxPool, kGlobalAvgPool, kDense };

struct Layer {
  LayerKind kind;
  std::string name;
  // Conv: channels in/out and odd kernel size. Dense: features in/out.
  Index in = 0;
  Index out = 0;
  Index kernel = 0;
};

// A feed-forward stack of primitives. Parameters are laid out in layer
// order, weight then bias for every conv and dense layer.
struct Network {
  Index height = 32;
  Index width = 32;
  Index channels = 3;
  Index classes = 10;
  std::vector<Layer> layers;
  // Default layer whose post-activation map feeds Grad-CAM.
  std::string capture_layer;

  const Layer* find(std::string_view name) const {
    for (const auto& l : layers) {
      if (l.name == name) return &l;
    }
    return nullptr;
  }

  std::vector<Shape> parameter_shapes() const {
    std::vector<Shape> shapes;
    for (const auto& l : layers) {
      if (l.kind == LayerKind::kConv) {
        shapes.push_back({l.out, l.in, l.kernel, l.kernel});
        shapes.push_back({l.out});
      } else if (l.kind == LayerKind::kDense) {
        shapes.push_back({l.out, l.in});
        shapes.push_back({l.out});
      }
    }
    return shapes;
  }

  // Output shape of every layer for the configured input; throws when the
  // stack is inconsistent.
  std::vector<Shape> propagate_shapes() const {
    std::vector<Shape> shapes;
    Shape cur{channels, height, width};
    for (const auto& l : layers) {
      switch (l.kind) {
        case LayerKind::kConv:
          if (cur.size() != 3 || cur[0] != l.in) {
            throw std::invalid_argument("layer " + l.name + " expects " +
                                        std::to_string(l.in) + " channels, got " +
                                        shape_string(cur));
          }
          cur = {l.out, cur[1], cur[2]};
          break;
        case LayerKind::kRelu:
          break;
        case LayerKind::kMaxPool:
          if (cur.size() != 3 || cur[1] < 2 || cur[2] < 2) {
            throw std::invalid_argument("layer " + l.name + " cannot pool " +
                                        shape_string(cur));
          }
          cur = {cur[0], cur[1] / 2, cur[2] / 2};
          break;
        case LayerKind::kGlobalAvgPool:
          if (cur.size() != 3) {
            throw std::invalid_argument("layer " + l.name + " needs a feature map");
          }
          cur = {cur[0]};
          break;
        case LayerKind::kDense:
          if (shape_size(cur) != l.in) {
            throw std::invalid_argument("layer " + l.name + " expects " +
                                        std::to_string(l.in) + " inputs, got " +
                                        shape_string(cur));
          }
          cur = {l.out};
          break;
      }
      shapes.push_back(cur);
    }
    if (cur.size() != 1 || cur[0] != classes) {
      throw std::invalid_argument("network output " + shape_string(cur) +
                                  " does not match class count " +
                                  std::to_string(classes));
    }
    return shapes;
  }
};

template <typename Scalar>
struct ForwardPass {
  Tape<Scalar> tape;
  Var input;
  std::vector<Var> params;
  Var logits;
  std::optional<Var> captured;
};

namespace detail {

inline void check_weights_shape(const Network& net,
                                const std::vector<Shape>& actual) {
  const auto expected = net.parameter_shapes();
  if (expected.size() != actual.size()) {
    throw std::invalid_argument("model expects " + std::to_string(expected.size()) +
                                " parameter tensors, got " +
                                std::to_string(actual.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i] != actual[i]) {
      throw std::invalid_argument("parameter " + std::to_string(i) + " has shape " +
                                  shape_string(actual[i]) + ", expected " +
                                  shape_string(expected[i]));
    }
  }
}

}  // namespace detail

// Records the network on a fresh tape. `input` is a [3,H,W] tensor. When
// `capture` names a conv layer, the post-activation output of that layer (the
// ReLU directly following it, if any) is returned in `captured`.
template <typename Scalar>
ForwardPass<Scalar> forward(const Network& net, const Weights<Scalar>& weights,
                            Tensor<Scalar> input,
                            std::optional<std::string_view> capture) {
  const Shape expected_input{net.channels, net.height, net.width};
  if (input.shape() != expected_input) {
    throw std::invalid_argument("input shape " + shape_string(input.shape()) +
                                " does not match model input " +
                                shape_string(expected_input));
  }
  std::vector<Shape> weight_shapes;
  weight_shapes.reserve(weights.size());
  for (const auto& w : weights) weight_shapes.push_back(w.shape());
  detail::check_weights_shape(net, weight_shapes);

  std::size_t capture_at = net.layers.size();
  if (capture) {
    bool found = false;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      if (net.layers[i].name == *capture) {
        if (net.layers[i].kind != LayerKind::kConv) {
          throw std::invalid_argument("capture layer '" + std::string(*capture) +
                                      "' is not a convolution");
        }
        capture_at = i;
        if (i + 1 < net.layers.size() &&
            net.layers[i + 1].kind == LayerKind::kRelu) {
          capture_at = i + 1;
        }
        found = true;
        break;
      }
    }
    if (!found) {
      throw std::invalid_argument("unknown layer id '" + std::string(*capture) + "'");
    }
  }

  ForwardPass<Scalar> pass;
  auto& tape = pass.tape;
  pass.input = tape.leaf(std::move(input));
  for (const auto& w : weights) pass.params.push_back(tape.leaf(w));

  Var cur = pass.input;
  std::size_t p = 0;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const Layer& layer = net.layers[i];
    switch (layer.kind) {
      case LayerKind::kConv:
        cur = conv2d(tape, cur, pass.params[p], pass.params[p + 1]);
        p += 2;
        break;
      case LayerKind::kRelu:
        cur = relu(tape, cur);
        break;
      case LayerKind::kMaxPool:
        cur = max_pool2(tape, cur);
        break;
      case LayerKind::kGlobalAvgPool:
        cur = global_avg_pool(tape, cur);
        break;
      case LayerKind::kDense:
        cur = dense(tape, cur, pass.params[p], pass.params[p + 1]);
        p += 2;
        break;
    }
    if (i == capture_at) pass.captured = cur;
  }
  if (tape.value(cur).size() != net.classes) {
    throw std::invalid_argument("network produced " +
                                std::to_string(tape.value(cur).size()) +
                                " logits, expected " + std::to_string(net.classes));
  }
  pass.logits = cur;
  return pass;
}

template <typename Scalar>
ForwardPass<Scalar> forward(const Network& net, const Weights<Scalar>& weights,
                            const Image& image,
                            std::optional<std::string_view> capture) {
  if (image.height != net.height || image.width != net.width) {
    throw std::invalid_argument(
        "image " + std::to_string(image.height) + "x" + std::to_string(image.width) +
        " does not match model input " + std::to_string(net.height) + "x" +
        std::to_string(net.width));
  }
  return forward(net, weights, to_chw<Scalar>(image), capture);
}

}  // namespace chromaskew

#endif  // CHROMASKEW_NETWORK_HPP_
