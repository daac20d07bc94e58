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

// Helpers shared by the unit tests.

#ifndef CHROMASKEW_TESTS_TEST_UTIL_HPP_
#define CHROMASKEW_TESTS_TEST_UTIL_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "chromaskew/image.hpp"
#include "chromaskew/network.hpp"
#include "chromaskew/rng.hpp"
#include "chromaskew/saliency.hpp"
#include "chromaskew/tensor.hpp"

namespace chromaskew::testing {

inline Tensor<double> random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  Tensor<double> t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

inline saliency::SaliencyMap random_map(Rng& rng, Index h, Index w) {
  saliency::SaliencyMap m(h, w);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform();
  return m;
}

inline Image random_image(Rng& rng, Index h, Index w) {
  Image img(h, w);
  for (Index i = 0; i < img.pixels.size(); ++i) {
    img.pixels.data()[i] = static_cast<float>(rng.uniform());
  }
  return img;
}

// Central differences of a scalar function at x.
inline Tensor<double> numeric_gradient(const std::function<double(const Tensor<double>&)>& f,
                                       Tensor<double> x, double h = 1e-4) {
  Tensor<double> g(x.shape());
  for (Index i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// |a - n| <= 1e-6 + rtol * |n| for every element; returns the worst excess.
inline double gradcheck_excess(const Tensor<double>& analytic, const Tensor<double>& numeric,
                               double rtol = 1e-3) {
  double worst = -1.0;
  for (Index i = 0; i < analytic.size(); ++i) {
    const double err = std::abs(analytic[i] - numeric[i]);
    worst = std::max(worst, err - (1e-6 + rtol * std::abs(numeric[i])));
  }
  return worst;
}

inline Layer conv(std::string name, Index in, Index out, Index k = 3) {
  return Layer{LayerKind::kConv, std::move(name), in, out, k};
}
inline Layer relu(std::string name) { return Layer{LayerKind::kRelu, std::move(name)}; }
inline Layer pool(std::string name) { return Layer{LayerKind::kMaxPool, std::move(name)}; }
inline Layer gap(std::string name) { return Layer{LayerKind::kGlobalAvgPool, std::move(name)}; }
inline Layer dense(std::string name, Index in, Index out) {
  return Layer{LayerKind::kDense, std::move(name), in, out};
}

inline Network make_net(Index size, Index classes, std::vector<Layer> layers,
                        std::string capture) {
  Network n;
  n.height = n.width = size;
  n.channels = 3;
  n.classes = classes;
  n.layers = std::move(layers);
  n.capture_layer = std::move(capture);
  n.propagate_shapes();
  return n;
}

inline Weights<double> random_weights(Rng& rng, const Network& net, double scale = 0.5) {
  Weights<double> w;
  for (const auto& s : net.parameter_shapes()) w.push_back(random_tensor(rng, s, -scale, scale));
  return w;
}

}  // namespace chromaskew::testing

#endif  // CHROMASKEW_TESTS_TEST_UTIL_HPP_
