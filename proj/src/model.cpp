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

#include "chromaskew/model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "chromaskew/rng.hpp"

namespace chromaskew {

std::string to_string(Architecture arch) {
  return arch == Architecture::kA ? "ARCH_A" : "ARCH_B";
}

Architecture parse_architecture(const std::string& name) {
  if (name == "ARCH_A" || name == "A" || name == "a") return Architecture::kA;
  if (name == "ARCH_B" || name == "B" || name == "b") return Architecture::kB;
  throw std::invalid_argument("unknown architecture '" + name + "'");
}

Network make_network(const ModelSpec& spec) {
  if (spec.classes < 2) throw std::invalid_argument("class count must be >= 2");
  if (spec.input_size < 4 || spec.input_size % 4 != 0) {
    throw std::invalid_argument("input size must be a positive multiple of 4");
  }
  Network net;
  net.height = net.width = spec.input_size;
  net.channels = 3;
  net.classes = spec.classes;
  const Index s = spec.input_size;
  using K = LayerKind;
  if (spec.architecture == Architecture::kA) {
    net.layers = {
        {K::kConv, "conv1", 3, 16, 3},   {K::kRelu, "relu1"},
        {K::kMaxPool, "pool1"},          {K::kConv, "conv2", 16, 32, 3},
        {K::kRelu, "relu2"},             {K::kMaxPool, "pool2"},
        {K::kConv, "conv3", 32, 32, 3},  {K::kRelu, "relu3"},
        {K::kDense, "dense", 32 * (s / 4) * (s / 4), spec.classes},
    };
  } else {
    net.layers = {
        {K::kConv, "conv1", 3, 8, 3},    {K::kRelu, "relu1"},
        {K::kConv, "conv2", 8, 16, 3},   {K::kRelu, "relu2"},
        {K::kMaxPool, "pool1"},          {K::kConv, "conv3", 16, 32, 3},
        {K::kRelu, "relu3"},             {K::kGlobalAvgPool, "gap"},
        {K::kDense, "dense", 32, spec.classes},
    };
  }
  net.capture_layer = spec.capture_layer.empty() ? "conv3" : spec.capture_layer;
  const Layer* capture = net.find(net.capture_layer);
  if (capture == nullptr || capture->kind != LayerKind::kConv) {
    throw std::invalid_argument("capture layer '" + net.capture_layer +
                                "' is not a conv layer of " +
                                to_string(spec.architecture));
  }
  net.propagate_shapes();
  return net;
}

Architecture architecture_of(const Network& network) {
  for (const auto& l : network.layers) {
    if (l.kind == LayerKind::kGlobalAvgPool) return Architecture::kB;
  }
  return Architecture::kA;
}

ModelWeights init_weights(const Network& network, std::uint64_t seed) {
  Rng rng(seed);
  ModelWeights weights;
  for (const Shape& shape : network.parameter_shapes()) {
    Tensor<float> t(shape);
    if (shape.size() > 1) {
      const Index fan_in = t.size() / shape[0];
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
      for (Index i = 0; i < t.size(); ++i) {
        t[i] = static_cast<float>(rng.uniform(-limit, limit));
      }
    }
    weights.push_back(std::move(t));
  }
  return weights;
}

Model build(const ModelSpec& spec, std::uint64_t seed) {
  Network net = make_network(spec);
  ModelWeights weights = init_weights(net, seed);
  return Model{std::move(net), std::move(weights)};
}

double accumulate_loss_gradient(const Network& network, const ModelWeights& weights,
                                const Sample& sample, ModelWeights& grads) {
  auto pass = forward<float>(network, weights, sample.image, std::nullopt);
  const Var loss = softmax_cross_entropy(pass.tape, pass.logits, sample.label);
  auto g = pass.tape.gradients(loss, pass.params);
  for (std::size_t i = 0; i < grads.size(); ++i) grads[i].data() += g[i].data();
  return pass.tape.value(loss)[0];
}

ModelWeights train(const Network& network, ModelWeights weights,
                   const LabeledDataset& dataset, const TrainOptions& options) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  if (options.batch == 0) throw std::invalid_argument("train: batch must be >= 1");
  for (const auto& s : dataset.samples) {
    if (s.label < 0 || s.label >= network.classes) {
      throw std::invalid_argument("train: label out of range");
    }
  }
  std::vector<std::size_t> order(dataset.size());
  for (unsigned epoch = 0; epoch < options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(options.seed, {epoch}));
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += options.batch) {
      const std::size_t end = std::min(order.size(), start + options.batch);
      ModelWeights grads;
      for (const auto& w : weights) grads.emplace_back(w.shape());
      for (std::size_t k = start; k < end; ++k) {
        accumulate_loss_gradient(network, weights, dataset.samples[order[k]], grads);
      }
      const float inv = 1.0f / static_cast<float>(end - start);
      for (auto& g : grads) g.data() *= inv;
      weights = sgd_step(weights, grads, options.learning_rate);
    }
  }
  return weights;
}

int argmax(const Tensor<float>& logits) {
  Index best = 0;
  for (Index i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return static_cast<int>(best);
}

Prediction predict(const Network& network, const ModelWeights& weights,
                   const Image& image) {
  auto pass = forward<float>(network, weights, image, std::nullopt);
  Tensor<float> logits = pass.tape.value(pass.logits);
  const int label = argmax(logits);
  return Prediction{label, std::move(logits)};
}

int predict_label(const Network& network, const ModelWeights& weights,
                  const Image& image) {
  return predict(network, weights, image).label;
}

std::vector<int> predict_labels(const Network& network, const ModelWeights& weights,
                                std::span<const Sample> samples) {
  std::vector<int> labels(samples.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(samples.size()); ++i) {
    labels[static_cast<std::size_t>(i)] =
        predict_label(network, weights, samples[static_cast<std::size_t>(i)].image);
  }
  return labels;
}

double accuracy(const Network& network, const ModelWeights& weights,
                const LabeledDataset& dataset) {
  if (dataset.empty()) return 0.0;
  const auto labels = predict_labels(network, weights, dataset.samples);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    hits += labels[i] == dataset.samples[i].label;
  }
  return static_cast<double>(hits) / static_cast<double>(dataset.size());
}

}  // namespace chromaskew
