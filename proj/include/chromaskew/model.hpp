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

#ifndef CHROMASKEW_MODEL_HPP_
#define CHROMASKEW_MODEL_HPP_

#include <cstdint>
#include <span>
#include <string>

#include "chromaskew/dataset.hpp"
#include "chromaskew/image.hpp"
#include "chromaskew/network.hpp"
#include "chromaskew/tensor.hpp"

namespace chromaskew {

// ARCH_A: conv(3,16) relu pool conv(16,32) relu pool conv(32,32) relu dense
// ARCH_B: conv(3,8) relu conv(8,16) relu pool conv(16,32) relu gap dense
enum class Architecture { kA, kB };

std::string to_string(Architecture arch);
Architecture parse_architecture(const std::string& name);

struct ModelSpec {
  Architecture architecture = Architecture::kA;
  Index input_size = 32;
  Index classes = 10;
  // Empty selects the last conv layer.
  std::string capture_layer;
};

struct Model {
  Network network;
  ModelWeights weights;
};

Network make_network(const ModelSpec& spec);

// Recovers the architecture of a network built by make_network.
Architecture architecture_of(const Network& network);

// He-uniform weights (limit sqrt(6 / fan_in)), zero biases.
ModelWeights init_weights(const Network& network, std::uint64_t seed);

Model build(const ModelSpec& spec, std::uint64_t seed);

struct TrainOptions {
  unsigned epochs = 1;
  float learning_rate = 0.05f;
  unsigned batch = 32;
  std::uint64_t seed = 0;
};

// Mini-batch SGD on softmax cross-entropy. The sample order of epoch e is a
// pure function of (seed, e).
ModelWeights train(const Network& network, ModelWeights weights,
                   const LabeledDataset& dataset, const TrainOptions& options);

// Loss gradient of one sample, summed into grads (same layout as weights).
// Returns the loss.
double accumulate_loss_gradient(const Network& network, const ModelWeights& weights,
                                const Sample& sample, ModelWeights& grads);

// argmax with ties broken toward the lower class index.
int argmax(const Tensor<float>& logits);

struct Prediction {
  int label;
  Tensor<float> logits;
};

Prediction predict(const Network& network, const ModelWeights& weights,
                   const Image& image);
inline Prediction predict(const Model& model, const Image& image) {
  return predict(model.network, model.weights, image);
}

int predict_label(const Network& network, const ModelWeights& weights,
                  const Image& image);

std::vector<int> predict_labels(const Network& network, const ModelWeights& weights,
                                std::span<const Sample> samples);

double accuracy(const Network& network, const ModelWeights& weights,
                const LabeledDataset& dataset);

}  // namespace chromaskew

#endif  // CHROMASKEW_MODEL_HPP_
