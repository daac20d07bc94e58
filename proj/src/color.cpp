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

#include "chromaskew/color.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace chromaskew::color {
namespace {

std::atomic<std::uint64_t> g_out_of_range{0};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double clamp_counted(double v) {
  if (v < 0.0 || v > 1.0 || std::isnan(v)) {
    g_out_of_range.fetch_add(1, std::memory_order_relaxed);
    return std::isnan(v) ? 0.0 : clamp01(v);
  }
  return v;
}

double wrap_unit(double v) {
  double w = v - std::floor(v);
  return w >= 1.0 ? 0.0 : w;
}

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

double deg(double rad) { return rad * 180.0 / std::numbers::pi; }
double rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

Hsv rgb_to_hsv(const Rgb& rgb) {
  const double r = rgb[0], g = rgb[1], b = rgb[2];
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double chroma = mx - mn;
  double h = 0.0;
  if (chroma > 0.0) {
    if (mx == r) {
      h = (g - b) / chroma;
      if (h < 0.0) h += 6.0;
    } else if (mx == g) {
      h = (b - r) / chroma + 2.0;
    } else {
      h = (r - g) / chroma + 4.0;
    }
    h /= 6.0;
    if (h >= 1.0) h -= 1.0;
  }
  const double s = mx > 0.0 ? chroma / mx : 0.0;
  return {h, s, mx};
}

Rgb hsv_to_rgb(const Hsv& hsv) {
  const double h6 = wrap_unit(hsv[0]) * 6.0;
  const double s = hsv[1], v = hsv[2];
  const double sector = std::floor(h6);
  const double f = h6 - sector;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (static_cast<int>(sector) % 6) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

std::uint64_t out_of_range_count() { return g_out_of_range.load(); }
void reset_out_of_range_count() { g_out_of_range.store(0); }

Image rgb_to_hsv(const Image& image) {
  Image out(image.height, image.width);
  for (Index p = 0; p < image.pixels.rows(); ++p) {
    const Hsv hsv = rgb_to_hsv(Rgb{clamp_counted(image.pixels(p, 0)),
                                   clamp_counted(image.pixels(p, 1)),
                                   clamp_counted(image.pixels(p, 2))});
    for (int c = 0; c < 3; ++c) out.pixels(p, c) = static_cast<float>(hsv[c]);
  }
  return out;
}

Image hsv_to_rgb(const Image& hsv) {
  Image out(hsv.height, hsv.width);
  for (Index p = 0; p < hsv.pixels.rows(); ++p) {
    const Rgb rgb = hsv_to_rgb(Hsv{wrap_unit(hsv.pixels(p, 0)),
                                   clamp_counted(hsv.pixels(p, 1)),
                                   clamp_counted(hsv.pixels(p, 2))});
    for (int c = 0; c < 3; ++c) out.pixels(p, c) = static_cast<float>(clamp01(rgb[c]));
  }
  return out;
}

Image hue_shift(const Image& image, double delta) {
  const double d = wrap_unit(delta);
  Image out(image.height, image.width);
  for (Index p = 0; p < image.pixels.rows(); ++p) {
    Hsv hsv = rgb_to_hsv(Rgb{clamp_counted(image.pixels(p, 0)),
                             clamp_counted(image.pixels(p, 1)),
                             clamp_counted(image.pixels(p, 2))});
    hsv[0] = wrap_unit(hsv[0] + d);
    const Rgb rgb = hsv_to_rgb(hsv);
    for (int c = 0; c < 3; ++c) out.pixels(p, c) = static_cast<float>(clamp01(rgb[c]));
  }
  return out;
}

Image channel_rescale(const Image& image, const std::array<double, 3>& alpha) {
  for (double a : alpha) {
    if (!(a >= kMinChannelScale && a <= kMaxChannelScale)) {
      throw std::invalid_argument("channel scale " + std::to_string(a) +
                                  " outside [0.5, 1.5]");
    }
  }
  Image out = image;
  for (int c = 0; c < 3; ++c) {
    out.pixels.col(c) =
        (image.pixels.col(c).cast<double>() * alpha[static_cast<std::size_t>(c)])
            .min(1.0)
            .max(0.0)
            .cast<float>();
  }
  return out;
}

Image contrast_jitter(const Image& image, double gamma, double beta) {
  if (!(gamma > 0.0)) throw std::invalid_argument("contrast factor must be > 0");
  const double mu = image.pixels.cast<double>().mean();
  Image out = image;
  out.pixels = ((image.pixels.cast<double>() - mu) * gamma + mu + beta)
                   .min(1.0)
                   .max(0.0)
                   .cast<float>();
  return out;
}

Image saturation_scale(const Image& image, double scale) {
  if (!(scale >= 0.0)) throw std::invalid_argument("saturation scale must be >= 0");
  Image out(image.height, image.width);
  for (Index p = 0; p < image.pixels.rows(); ++p) {
    Hsv hsv = rgb_to_hsv(Rgb{clamp_counted(image.pixels(p, 0)),
                             clamp_counted(image.pixels(p, 1)),
                             clamp_counted(image.pixels(p, 2))});
    hsv[1] = clamp01(hsv[1] * scale);
    const Rgb rgb = hsv_to_rgb(hsv);
    for (int c = 0; c < 3; ++c) out.pixels(p, c) = static_cast<float>(clamp01(rgb[c]));
  }
  return out;
}

bool PerturbationParams::hue_is_identity() const { return wrap_unit(hue) == 0.0; }
bool PerturbationParams::scale_is_identity() const {
  return scale[0] == 1.0 && scale[1] == 1.0 && scale[2] == 1.0;
}
bool PerturbationParams::jitter_is_identity() const {
  return contrast == 1.0 && brightness == 0.0;
}
bool PerturbationParams::is_identity() const {
  return hue_is_identity() && scale_is_identity() && jitter_is_identity();
}

void PerturbationParams::validate() const {
  for (double a : scale) {
    if (!(a >= kMinChannelScale && a <= kMaxChannelScale)) {
      throw std::invalid_argument("channel scale " + std::to_string(a) +
                                  " outside [0.5, 1.5]");
    }
  }
  if (!(contrast > 0.0)) throw std::invalid_argument("contrast factor must be > 0");
  if (!std::isfinite(hue) || !std::isfinite(brightness)) {
    throw std::invalid_argument("hue shift and brightness must be finite");
  }
}

std::string PerturbationParams::to_string() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "hue=%g scale=(%g,%g,%g) contrast=%g brightness=%g",
                hue, scale[0], scale[1], scale[2], contrast, brightness);
  return buf;
}

std::string to_string(Operator op) {
  switch (op) {
    case Operator::kHue: return "hue";
    case Operator::kRescale: return "rescale";
    case Operator::kJitter: return "jitter";
  }
  return "?";
}

Operator parse_operator(const std::string& name) {
  if (name == "hue") return Operator::kHue;
  if (name == "rescale") return Operator::kRescale;
  if (name == "jitter") return Operator::kJitter;
  throw std::invalid_argument("unknown operator '" + name + "'");
}

Image apply(const PerturbationParams& theta, const Image& image,
            const OperatorOrder& order) {
  theta.validate();
  Image out = image;
  for (Operator op : order) {
    switch (op) {
      case Operator::kHue:
        if (!theta.hue_is_identity()) out = hue_shift(out, theta.hue);
        break;
      case Operator::kRescale:
        if (!theta.scale_is_identity()) out = channel_rescale(out, theta.scale);
        break;
      case Operator::kJitter:
        if (!theta.jitter_is_identity()) {
          out = contrast_jitter(out, theta.contrast, theta.brightness);
        }
        break;
    }
  }
  return out;
}

Lab srgb_to_lab(const Rgb& rgb) {
  const double r = srgb_to_linear(clamp01(rgb[0]));
  const double g = srgb_to_linear(clamp01(rgb[1]));
  const double b = srgb_to_linear(clamp01(rgb[2]));
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  constexpr double xn = 0.95047, yn = 1.0, zn = 1.08883;
  const double fx = lab_f(x / xn), fy = lab_f(y / yn), fz = lab_f(z / zn);
  return Lab{116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

double delta_e2000(const Lab& lab1, const Lab& lab2) {
  constexpr double pow25_7 = 6103515625.0;  // 25^7
  const double c1 = std::hypot(lab1.a, lab1.b);
  const double c2 = std::hypot(lab2.a, lab2.b);
  const double c_bar7 = std::pow((c1 + c2) / 2.0, 7.0);
  const double g = 0.5 * (1.0 - std::sqrt(c_bar7 / (c_bar7 + pow25_7)));
  const double a1p = (1.0 + g) * lab1.a;
  const double a2p = (1.0 + g) * lab2.a;
  const double c1p = std::hypot(a1p, lab1.b);
  const double c2p = std::hypot(a2p, lab2.b);
  auto hue_angle = [](double b, double ap) {
    if (b == 0.0 && ap == 0.0) return 0.0;
    double h = deg(std::atan2(b, ap));
    return h < 0.0 ? h + 360.0 : h;
  };
  const double h1p = hue_angle(lab1.b, a1p);
  const double h2p = hue_angle(lab2.b, a2p);

  const double dl = lab2.l - lab1.l;
  const double dc = c2p - c1p;
  double dh = 0.0;
  if (c1p * c2p != 0.0) {
    dh = h2p - h1p;
    if (dh > 180.0) dh -= 360.0;
    else if (dh < -180.0) dh += 360.0;
  }
  const double d_big_h = 2.0 * std::sqrt(c1p * c2p) * std::sin(rad(dh / 2.0));

  const double l_bar = (lab1.l + lab2.l) / 2.0;
  const double c_bar_p = (c1p + c2p) / 2.0;
  double h_bar = h1p + h2p;
  if (c1p * c2p != 0.0) {
    if (std::abs(h1p - h2p) <= 180.0) h_bar /= 2.0;
    else if (h1p + h2p < 360.0) h_bar = (h_bar + 360.0) / 2.0;
    else h_bar = (h_bar - 360.0) / 2.0;
  }

  const double t = 1.0 - 0.17 * std::cos(rad(h_bar - 30.0)) +
                   0.24 * std::cos(rad(2.0 * h_bar)) +
                   0.32 * std::cos(rad(3.0 * h_bar + 6.0)) -
                   0.20 * std::cos(rad(4.0 * h_bar - 63.0));
  const double d_theta = 30.0 * std::exp(-std::pow((h_bar - 275.0) / 25.0, 2.0));
  const double c_bar_p7 = std::pow(c_bar_p, 7.0);
  const double rc = 2.0 * std::sqrt(c_bar_p7 / (c_bar_p7 + pow25_7));
  const double l50 = (l_bar - 50.0) * (l_bar - 50.0);
  const double sl = 1.0 + 0.015 * l50 / std::sqrt(20.0 + l50);
  const double sc = 1.0 + 0.045 * c_bar_p;
  const double sh = 1.0 + 0.015 * c_bar_p * t;
  const double rt = -std::sin(rad(2.0 * d_theta)) * rc;

  const double tl = dl / sl, tc = dc / sc, th = d_big_h / sh;
  return std::sqrt(std::max(0.0, tl * tl + tc * tc + th * th + rt * tc * th));
}

double delta_e2000(const Rgb& c1, const Rgb& c2) {
  return delta_e2000(srgb_to_lab(c1), srgb_to_lab(c2));
}

double mean_delta_e(const Image& a, const Image& b) {
  if (!a.same_size(b)) throw std::invalid_argument("mean_delta_e: image sizes differ");
  double total = 0.0;
  for (Index p = 0; p < a.pixels.rows(); ++p) {
    total += delta_e2000(Rgb{a.pixels(p, 0), a.pixels(p, 1), a.pixels(p, 2)},
                         Rgb{b.pixels(p, 0), b.pixels(p, 1), b.pixels(p, 2)});
  }
  return total / static_cast<double>(a.pixels.rows());
}

ContrastVector fg_bg_contrast(const Image& image, const Mask& foreground) {
  if (foreground.rows() != image.height || foreground.cols() != image.width) {
    throw std::invalid_argument("fg_bg_contrast: mask size does not match image");
  }
  Eigen::Array3d fg = Eigen::Array3d::Zero(), bg = Eigen::Array3d::Zero();
  Index nf = 0, nb = 0;
  for (Index i = 0; i < image.height; ++i) {
    for (Index j = 0; j < image.width; ++j) {
      const Eigen::Array3d px = image.pixels.row(i * image.width + j).cast<double>().transpose();
      if (foreground(i, j)) {
        fg += px;
        ++nf;
      } else {
        bg += px;
        ++nb;
      }
    }
  }
  if (nf == 0) throw std::invalid_argument("fg_bg_contrast: empty foreground");
  if (nb == 0) throw std::invalid_argument("fg_bg_contrast: empty background");
  return (fg / static_cast<double>(nf) - bg / static_cast<double>(nb)).abs();
}

}  // namespace chromaskew::color
