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

#ifndef CHROMASKEW_SALIENCY_HPP_
#define CHROMASKEW_SALIENCY_HPP_

#include <Eigen/Core>

#include <string_view>

#include "chromaskew/image.hpp"
#include "chromaskew/network.hpp"
#include "chromaskew/tensor.hpp"

namespace chromaskew::saliency {

// H x W attribution map. Normalized maps lie in [0,1].
using SaliencyMap = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Min-max normalization. A map with zero range (including all zeros)
// normalizes to all zeros.
SaliencyMap normalize(const SaliencyMap& map);

// Bilinear resampling with half-pixel centers and edge clamping.
SaliencyMap upsample_bilinear(const SaliencyMap& map, Index rows, Index cols);

// Low-resolution, unnormalized class activation maps computed from one
// forward/backward pass at the capture layer.
struct RawCams {
  SaliencyMap grad_cam;
  SaliencyMap grad_cam_pp;
};

// Combine captured activations A [K,h,w] and gradients dY/dA into raw
// Grad-CAM and Grad-CAM++ maps.
RawCams cams_from_activations(const Tensor<float>& activations,
                              const Tensor<float>& gradients);

// Forward pass recording the network's capture layer.
ForwardPass<float> capture_pass(const Network& net, const ModelWeights& weights,
                                const Image& image);

// Both maps for class `cls` from an existing capture pass.
RawCams raw_cams(ForwardPass<float>& pass, const Network& net, int cls);

// Grad-CAM of `cls`, upsampled to the input size and normalized.
SaliencyMap grad_cam(const Network& net, const ModelWeights& weights,
                     const Image& image, int cls);
SaliencyMap grad_cam_pp(const Network& net, const ModelWeights& weights,
                        const Image& image, int cls);

struct Explanation {
  SaliencyMap grad_cam;
  SaliencyMap grad_cam_pp;
};

// Grad-CAM and Grad-CAM++ (input resolution, normalized) sharing one pass.
Explanation explain(const Network& net, const ModelWeights& weights,
                    const Image& image, int cls);

// Upsample a raw map to the network input size and normalize it.
SaliencyMap finish(const SaliencyMap& raw, const Network& net);

// max_c |dy^c/dx|, normalized.
SaliencyMap vanilla_saliency(const Network& net, const ModelWeights& weights,
                             const Image& image, int cls);

// (x - 0) * mean of gradients at the midpoint Riemann nodes (k + 1/2)/steps
// of the straight path from the all-zeros baseline. Shape [3,H,W].
Tensor<float> integrated_gradients_attributions(const Network& net,
                                                const ModelWeights& weights,
                                                const Image& image, int cls,
                                                unsigned steps);

// Channel-wise max of |attribution|, normalized.
SaliencyMap integrated_gradients(const Network& net, const ModelWeights& weights,
                                 const Image& image, int cls, unsigned steps);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double data_range = 1.0;
};

// Mean local SSIM over every fully contained Gaussian window.
double ssim(const SaliencyMap& a, const SaliencyMap& b, const SsimOptions& options = {});

// |TopK(a) ∩ TopK(b)| / K * 100, K = round(k_fraction * H * W); ties in TopK
// go to the lower row-major index.
double peak_overlap(const SaliencyMap& a, const SaliencyMap& b, double k_fraction);

// Mean absolute difference.
double l1_distance(const SaliencyMap& a, const SaliencyMap& b);

struct ForegroundMask {
  Mask mask;
  double threshold = 0.0;
  double tau = 0.0;
  Index count() const { return mask.count(); }
};

// Pixels at or above the upper-tail nearest-rank threshold: with values
// sorted ascending, T is the value at position n - ceil(tau * n).
ForegroundMask foreground_mask(const SaliencyMap& map, double tau);

}  // namespace chromaskew::saliency

#endif  // CHROMASKEW_SALIENCY_HPP_
