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

#include <cmath>

#include "chromaskew/data.hpp"
#include "chromaskew/model.hpp"

namespace chromaskew {
namespace {

TEST(ModelTest, ArchitectureShapes) {
  const Network a = make_network({Architecture::kA, 32, 10, ""});
  const auto sa = a.propagate_shapes();
  EXPECT_EQ(sa.back(), (Shape{10}));
  EXPECT_EQ(a.capture_layer, "conv3");
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].name == "relu3") EXPECT_EQ(sa[i], (Shape{32, 8, 8}));
  }
  const Network b = make_network({Architecture::kB, 32, 10, ""});
  const auto sb = b.propagate_shapes();
  for (std::size_t i = 0; i < b.layers.size(); ++i) {
    if (b.layers[i].name == "relu3") EXPECT_EQ(sb[i], (Shape{32, 16, 16}));
  }
  EXPECT_EQ(architecture_of(a), Architecture::kA);
  EXPECT_EQ(architecture_of(b), Architecture::kB);
  EXPECT_EQ(to_string(Architecture::kB), "ARCH_B");
  EXPECT_EQ(parse_architecture("ARCH_A"), Architecture::kA);
  EXPECT_THROW(parse_architecture("resnet"), std::invalid_argument);
}

TEST(ModelTest, RejectsBadSpecs) {
  EXPECT_THROW(make_network({Architecture::kA, 30, 10, ""}), std::invalid_argument);
  EXPECT_THROW(make_network({Architecture::kA, 32, 1, ""}), std::invalid_argument);
  EXPECT_THROW(make_network({Architecture::kA, 32, 10, "relu1"}), std::invalid_argument);
  EXPECT_THROW(make_network({Architecture::kA, 32, 10, "nope"}), std::invalid_argument);
  EXPECT_NO_THROW(make_network({Architecture::kA, 32, 10, "conv1"}));
}

TEST(ModelTest, HeUniformBoundsAndZeroBias) {
  const Network net = make_network({Architecture::kA, 16, 4, ""});
  const auto w = init_weights(net, 3);
  const auto shapes = net.parameter_shapes();
  ASSERT_EQ(w.size(), shapes.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    ASSERT_EQ(w[i].shape(), shapes[i]);
    if (shapes[i].size() == 1) {
      EXPECT_TRUE((w[i].data().array() == 0.0f).all());
      continue;
    }
    const double limit = std::sqrt(6.0 * static_cast<double>(shapes[i][0]) /
                                   static_cast<double>(w[i].size()));
    EXPECT_LE(w[i].data().cwiseAbs().maxCoeff(), limit);
    EXPECT_GT(w[i].data().cwiseAbs().maxCoeff(), 0.5 * limit);
  }
  EXPECT_TRUE((w == init_weights(net, 3)));
  EXPECT_FALSE((w == init_weights(net, 4)));
}

TEST(ModelTest, ArgmaxTiesGoLow) {
  Tensor<float> z = Tensor<float>::constant({4}, 1.0f);
  EXPECT_EQ(argmax(z), 0);
  z[2] = 2.0f;
  z[3] = 2.0f;
  EXPECT_EQ(argmax(z), 2);
}

TEST(ModelTest, TrainingIsDeterministicAndReducesLoss) {
  const auto data = data::generate_shapes(64, 2, 16, 11);
  const Model m = build({Architecture::kA, 16, 2, ""}, 5);
  auto mean_loss = [&](const ModelWeights& w) {
    ModelWeights g;
    for (const auto& t : w) g.emplace_back(t.shape());
    double s = 0.0;
    for (const auto& smp : data.samples) s += accumulate_loss_gradient(m.network, w, smp, g);
    return s / static_cast<double>(data.size());
  };
  const TrainOptions opts{3, 0.05f, 16, 9};
  const auto w1 = train(m.network, m.weights, data, opts);
  const auto w2 = train(m.network, m.weights, data, opts);
  EXPECT_TRUE((w1 == w2));
  EXPECT_LT(mean_loss(w1), mean_loss(m.weights));
}

TEST(ModelTest, TwoClassShapesReachHighAccuracy) {
  const auto train_set = data::generate_shapes(200, 2, 32, 21);
  const auto test_set = data::generate_shapes(100, 2, 32, 22);
  const Model m = build({Architecture::kA, 32, 2, ""}, 1);
  const auto w = train(m.network, m.weights, train_set, {5, 0.05f, 16, 2});
  EXPECT_GE(accuracy(m.network, w, test_set), 0.95);
}

TEST(ModelTest, TrainRejectsBadInput) {
  const Model m = build({Architecture::kB, 16, 2, ""}, 1);
  LabeledDataset empty;
  EXPECT_THROW(train(m.network, m.weights, empty, {}), std::invalid_argument);
  auto d = data::generate_shapes(4, 2, 16, 1);
  d.samples[0].label = 5;
  EXPECT_THROW(train(m.network, m.weights, d, {}), std::invalid_argument);
  EXPECT_THROW(predict(m, Image(8, 8)), std::invalid_argument);
}

}  // namespace
}  // namespace chromaskew
