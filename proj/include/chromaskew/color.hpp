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

#ifndef CHROMASKEW_COLOR_HPP_
#define CHROMASKEW_COLOR_HPP_

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string>

#include "chromaskew/image.hpp"

namespace chromaskew::color {

using Rgb = std::array<double, 3>;
using Hsv = std::array<double, 3>;

struct Lab {
  double l = 0.0;
  double a = 0.0;
  double b = 0.0;
};

// Hexcone HSV, every component in [0,1]. Achromatic pixels get H = 0.
Hsv rgb_to_hsv(const Rgb& rgb);
Rgb hsv_to_rgb(const Hsv& hsv);

// Image-level conversions; the HSV image stores H,S,V in the three channels.
// Inputs outside [0,1] are clamped and counted in out_of_range_count().
Image rgb_to_hsv(const Image& image);
Image hsv_to_rgb(const Image& hsv);

std::uint64_t out_of_range_count();
void reset_out_of_range_count();

// HSV^-1((H + delta) mod 1, S, V); delta is taken mod 1.
Image hue_shift(const Image& image, double delta);

// x'^c = clamp(alpha_c * x^c, 0, 1), alpha_c in [0.5, 1.5].
inline constexpr double kMinChannelScale = 0.5;
inline constexpr double kMaxChannelScale = 1.5;
Image channel_rescale(const Image& image, const std::array<double, 3>& alpha);

// x' = clamp(gamma * (x - mu) + mu + beta, 0, 1), mu the global mean of x.
Image contrast_jitter(const Image& image, double gamma, double beta);

// S' = clamp(s * S, 0, 1) in HSV.
Image saturation_scale(const Image& image, double scale);

// theta = (hue shift, channel scales, contrast, brightness).
struct PerturbationParams {
  double hue = 0.0;
  std::array<double, 3> scale{1.0, 1.0, 1.0};
  double contrast = 1.0;
  double brightness = 0.0;

  static PerturbationParams identity() { return {}; }
  bool hue_is_identity() const;
  bool scale_is_identity() const;
  bool jitter_is_identity() const;
  bool is_identity() const;
  // Throws std::invalid_argument on scales outside [0.5,1.5] or contrast <= 0.
  void validate() const;
  std::string to_string() const;

  friend bool operator==(const PerturbationParams&, const PerturbationParams&) = default;
};

enum class Operator { kHue, kRescale, kJitter };
using OperatorOrder = std::array<Operator, 3>;
inline constexpr OperatorOrder kDefaultOrder{Operator::kHue, Operator::kRescale,
                                             Operator::kJitter};

std::string to_string(Operator op);
Operator parse_operator(const std::string& name);

// T_theta(x): the three operators in `order`, each clamped to [0,1]. An
// operator whose parameters are the identity is skipped.
Image apply(const PerturbationParams& theta, const Image& image,
            const OperatorOrder& order = kDefaultOrder);

// sRGB (D65) -> CIELAB.
Lab srgb_to_lab(const Rgb& rgb);

// CIEDE2000 with kL = kC = kH = 1.
double delta_e2000(const Lab& lab1, const Lab& lab2);
double delta_e2000(const Rgb& c1, const Rgb& c2);

// Mean CIEDE2000 over corresponding pixels.
double mean_delta_e(const Image& a, const Image& b);

// [|mu_f^R - mu_b^R|, |mu_f^G - mu_b^G|, |mu_f^B - mu_b^B|]
using ContrastVector = Eigen::Array3d;
ContrastVector fg_bg_contrast(const Image& image, const Mask& foreground);

}  // namespace chromaskew::color

#endif  // CHROMASKEW_COLOR_HPP_
