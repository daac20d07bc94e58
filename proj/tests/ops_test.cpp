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

#include "chromaskew/ops.hpp"
#include "gradcheck.hpp"
#include "test_util.hpp"

namespace chromaskew {
namespace {

using testing::random_tensor;

TEST(OpsGradTest, EveryPrimitiveMatchesFiniteDifferences) {
  for (const auto& c : testing::primitive_cases()) {
    Rng rng(derive_seed(17, {c.name.size()}));
    for (int i = 0; i < 20; ++i) {
      const auto r = c.run(rng, 1000 + static_cast<std::uint64_t>(i));
      EXPECT_LE(r.excess, 0.0) << c.name << " instance " << i;
      EXPECT_GT(r.checked, 0u);
    }
  }
}

TEST(OpsTest, Conv2dMatchesDirectLoops) {
  Rng rng(5);
  const auto x = random_tensor(rng, {2, 5, 4});
  const auto w = random_tensor(rng, {3, 2, 3, 3});
  const auto b = random_tensor(rng, {3});
  Tape<double> t;
  const Var y = conv2d(t, t.leaf(x), t.leaf(w), t.leaf(b));
  const auto& out = t.value(y);
  ASSERT_EQ(out.shape(), (Shape{3, 5, 4}));
  for (Index o = 0; o < 3; ++o) {
    for (Index i = 0; i < 5; ++i) {
      for (Index j = 0; j < 4; ++j) {
        double s = b[o];
        for (Index c = 0; c < 2; ++c) {
          for (Index di = -1; di <= 1; ++di) {
            for (Index dj = -1; dj <= 1; ++dj) {
              const Index si = i + di, sj = j + dj;
              if (si < 0 || si >= 5 || sj < 0 || sj >= 4) continue;
              s += w[((o * 2 + c) * 3 + di + 1) * 3 + dj + 1] * x[(c * 5 + si) * 4 + sj];
            }
          }
        }
        EXPECT_NEAR(out[(o * 5 + i) * 4 + j], s, 1e-12);
      }
    }
  }
}

TEST(OpsTest, Conv2dRejectsEvenKernelAndMismatch) {
  Tape<double> t;
  const Var x = t.leaf(Tensor<double>(Shape{2, 4, 4}));
  EXPECT_THROW(conv2d(t, x, t.leaf(Tensor<double>(Shape{1, 2, 2, 2})),
                      t.leaf(Tensor<double>(Shape{1}))),
               std::invalid_argument);
  EXPECT_THROW(conv2d(t, x, t.leaf(Tensor<double>(Shape{1, 3, 3, 3})),
                      t.leaf(Tensor<double>(Shape{1}))),
               std::invalid_argument);
}

TEST(OpsTest, MaxPoolTieGoesToFirstElement) {
  Tape<double> t;
  const Var x = t.leaf(Tensor<double>::constant({1, 2, 2}, 3.0));
  const Var y = max_pool2(t, x);
  EXPECT_EQ(t.value(y)[0], 3.0);
  const auto g = t.grad_wrt(select(t, y, 0), x);
  EXPECT_EQ(g[0], 1.0);
  EXPECT_EQ(g[1] + g[2] + g[3], 0.0);
}

TEST(OpsTest, MaxPoolFloorsOddSizes) {
  Tape<double> t;
  const Var y = max_pool2(t, t.leaf(Tensor<double>(Shape{2, 5, 3})));
  EXPECT_EQ(t.value(y).shape(), (Shape{2, 2, 1}));
  EXPECT_THROW(max_pool2(t, t.leaf(Tensor<double>(Shape{1, 1, 4}))), std::invalid_argument);
}

TEST(OpsTest, ReluSubgradientAtZeroIsZero) {
  Tape<double> t;
  Tensor<double> v(Shape{3});
  v[0] = -1.0;
  v[2] = 2.0;
  const Var x = t.leaf(v);
  const Var r = relu(t, x);
  EXPECT_EQ(t.value(r)[0], 0.0);
  EXPECT_EQ(t.value(r)[2], 2.0);
  EXPECT_EQ(t.grad_wrt(select(t, r, 1), x)[1], 0.0);
}

TEST(OpsTest, SoftmaxCrossEntropyValue) {
  Tape<double> t;
  Tensor<double> z(Shape{3});
  z[0] = 1.0;
  z[1] = 2.0;
  z[2] = 3.0;
  const Var loss = softmax_cross_entropy(t, t.leaf(z), 0);
  const double expected = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0)) - 1.0;
  EXPECT_NEAR(t.value(loss)[0], expected, 1e-12);
  EXPECT_THROW(softmax_cross_entropy(t, t.leaf(z), 3), std::invalid_argument);
}

TEST(OpsTest, SoftmaxCrossEntropyStableForLargeLogits) {
  Tape<float> t;
  Tensor<float> z(Shape{2});
  z[0] = 1000.0f;
  z[1] = 0.0f;
  const Var x = t.leaf(z);
  const Var loss = softmax_cross_entropy(t, x, 1);
  EXPECT_NEAR(t.value(loss)[0], 1000.0f, 1e-3);
  const auto g = t.grad_wrt(loss, x);
  EXPECT_TRUE(std::isfinite(g[0]) && std::isfinite(g[1]));
  EXPECT_NEAR(g[1], -1.0f, 1e-6);
}

TEST(OpsTest, GlobalAvgPoolAndDense) {
  Tape<double> t;
  Tensor<double> x(Shape{2, 1, 2});
  x[0] = 1.0;
  x[1] = 3.0;
  x[2] = -2.0;
  x[3] = 4.0;
  const Var p = global_avg_pool(t, t.leaf(x));
  EXPECT_EQ(t.value(p)[0], 2.0);
  EXPECT_EQ(t.value(p)[1], 1.0);
  Tensor<double> w(Shape{1, 2});
  w[0] = 0.5;
  w[1] = -1.0;
  const Var y = dense(t, p, t.leaf(w), t.leaf(Tensor<double>::constant({1}, 0.25)));
  EXPECT_EQ(t.value(y)[0], 0.25);
  EXPECT_THROW(dense(t, p, t.leaf(Tensor<double>(Shape{1, 3})), t.leaf(Tensor<double>(Shape{1}))),
               std::invalid_argument);
}

}  // namespace
}  // namespace chromaskew
