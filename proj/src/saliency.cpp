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

#include "chromaskew/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "chromaskew/ops.hpp"

namespace chromaskew::saliency {
namespace {

void check_same_shape(const SaliencyMap& a, const SaliencyMap& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": map shapes differ (" +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

void check_class(const Network& net, int cls) {
  if (cls < 0 || cls >= net.classes) {
    throw std::invalid_argument("class " + std::to_string(cls) + " out of range");
  }
}

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(size));
  const double center = (size - 1) / 2.0;
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - center;
    w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += w[static_cast<std::size_t>(i)];
  }
  for (double& v : w) v /= total;
  return w;
}

// 'valid' separable filtering.
SaliencyMap filter_valid(const SaliencyMap& m, const std::vector<double>& w) {
  const Index k = static_cast<Index>(w.size());
  const Index rows = m.rows() - k + 1, cols = m.cols() - k + 1;
  SaliencyMap horizontal(m.rows(), cols);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < cols; ++j) {
      double s = 0.0;
      for (Index t = 0; t < k; ++t) s += w[static_cast<std::size_t>(t)] * m(i, j + t);
      horizontal(i, j) = s;
    }
  }
  SaliencyMap out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      double s = 0.0;
      for (Index t = 0; t < k; ++t) s += w[static_cast<std::size_t>(t)] * horizontal(i + t, j);
      out(i, j) = s;
    }
  }
  return out;
}

std::vector<Index> top_k(const SaliencyMap& m, Index k) {
  std::vector<Index> idx(static_cast<std::size_t>(m.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  const double* v = m.data();
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [v](Index a, Index b) {
    return v[a] > v[b] || (v[a] == v[b] && a < b);
  });
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

SaliencyMap normalize(const SaliencyMap& map) {
  if (map.size() == 0) return map;
  const double lo = map.minCoeff(), hi = map.maxCoeff();
  if (!(hi - lo > 0.0)) return SaliencyMap::Zero(map.rows(), map.cols());
  return (map - lo) / (hi - lo);
}

SaliencyMap upsample_bilinear(const SaliencyMap& map, Index rows, Index cols) {
  if (map.rows() == rows && map.cols() == cols) return map;
  SaliencyMap out(rows, cols);
  const double sy = static_cast<double>(map.rows()) / static_cast<double>(rows);
  const double sx = static_cast<double>(map.cols()) / static_cast<double>(cols);
  for (Index i = 0; i < rows; ++i) {
    const double y = std::clamp((i + 0.5) * sy - 0.5, 0.0, static_cast<double>(map.rows() - 1));
    const Index y0 = static_cast<Index>(std::floor(y));
    const Index y1 = std::min(y0 + 1, map.rows() - 1);
    const double wy = y - static_cast<double>(y0);
    for (Index j = 0; j < cols; ++j) {
      const double x =
          std::clamp((j + 0.5) * sx - 0.5, 0.0, static_cast<double>(map.cols() - 1));
      const Index x0 = static_cast<Index>(std::floor(x));
      const Index x1 = std::min(x0 + 1, map.cols() - 1);
      const double wx = x - static_cast<double>(x0);
      out(i, j) = (1.0 - wy) * ((1.0 - wx) * map(y0, x0) + wx * map(y0, x1)) +
                  wy * ((1.0 - wx) * map(y1, x0) + wx * map(y1, x1));
    }
  }
  return out;
}

RawCams cams_from_activations(const Tensor<float>& activations,
                              const Tensor<float>& gradients) {
  if (activations.rank() != 3 || !activations.same_shape(gradients)) {
    throw std::invalid_argument("cams_from_activations: expected matching [K,h,w] tensors");
  }
  const Index channels = activations.dim(0), h = activations.dim(1), w = activations.dim(2);
  const Index area = h * w;
  const Eigen::MatrixXd a = activations.matrix(channels, area).cast<double>();
  const Eigen::MatrixXd g = gradients.matrix(channels, area).cast<double>();

  Eigen::VectorXd gc_weights = g.rowwise().mean();
  Eigen::VectorXd pp_weights(channels);
  for (Index k = 0; k < channels; ++k) {
    const double a_sum = a.row(k).sum();
    double wk = 0.0;
    for (Index p = 0; p < area; ++p) {
      const double gp = g(k, p);
      const double g2 = gp * gp;
      const double denom = 2.0 * g2 + a_sum * g2 * gp;
      const double alpha = std::abs(denom) < 1e-12 ? 0.0 : g2 / denom;
      wk += alpha * std::max(gp, 0.0);
    }
    pp_weights[k] = wk;
  }

  RawCams cams;
  Eigen::RowVectorXd gc = gc_weights.transpose() * a;
  Eigen::RowVectorXd pp = pp_weights.transpose() * a;
  cams.grad_cam = Eigen::Map<SaliencyMap>(gc.data(), h, w).max(0.0);
  cams.grad_cam_pp = Eigen::Map<SaliencyMap>(pp.data(), h, w).max(0.0);
  return cams;
}

ForwardPass<float> capture_pass(const Network& net, const ModelWeights& weights,
                                const Image& image) {
  return forward<float>(net, weights, image, net.capture_layer);
}

RawCams raw_cams(ForwardPass<float>& pass, const Network& net, int cls) {
  check_class(net, cls);
  const Var score = select(pass.tape, pass.logits, cls);
  const Tensor<float> grad = pass.tape.grad_wrt(score, *pass.captured);
  return cams_from_activations(pass.tape.value(*pass.captured), grad);
}

SaliencyMap finish(const SaliencyMap& raw, const Network& net) {
  return normalize(upsample_bilinear(raw, net.height, net.width));
}

Explanation explain(const Network& net, const ModelWeights& weights,
                    const Image& image, int cls) {
  auto pass = capture_pass(net, weights, image);
  const RawCams cams = raw_cams(pass, net, cls);
  return Explanation{finish(cams.grad_cam, net), finish(cams.grad_cam_pp, net)};
}

SaliencyMap grad_cam(const Network& net, const ModelWeights& weights,
                     const Image& image, int cls) {
  auto pass = capture_pass(net, weights, image);
  return finish(raw_cams(pass, net, cls).grad_cam, net);
}

SaliencyMap grad_cam_pp(const Network& net, const ModelWeights& weights,
                        const Image& image, int cls) {
  auto pass = capture_pass(net, weights, image);
  return finish(raw_cams(pass, net, cls).grad_cam_pp, net);
}

namespace {

Tensor<float> input_gradient(const Network& net, const ModelWeights& weights,
                             Tensor<float> input, int cls) {
  auto pass = forward<float>(net, weights, std::move(input), std::nullopt);
  const Var score = select(pass.tape, pass.logits, cls);
  return pass.tape.grad_wrt(score, pass.input);
}

SaliencyMap channel_abs_max(const Tensor<float>& t, Index h, Index w) {
  const auto m = t.matrix(3, h * w);
  Eigen::RowVectorXd mx = m.cast<double>().cwiseAbs().colwise().maxCoeff();
  return Eigen::Map<SaliencyMap>(mx.data(), h, w);
}

}  // namespace

SaliencyMap vanilla_saliency(const Network& net, const ModelWeights& weights,
                             const Image& image, int cls) {
  check_class(net, cls);
  const Tensor<float> g = input_gradient(net, weights, to_chw<float>(image), cls);
  return normalize(channel_abs_max(g, image.height, image.width));
}

Tensor<float> integrated_gradients_attributions(const Network& net,
                                                const ModelWeights& weights,
                                                const Image& image, int cls,
                                                unsigned steps) {
  check_class(net, cls);
  if (steps == 0) throw std::invalid_argument("integrated gradients needs steps >= 1");
  const Tensor<float> x = to_chw<float>(image);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(x.size());
  for (unsigned k = 0; k < steps; ++k) {
    const float alpha = static_cast<float>((k + 0.5) / steps);
    Tensor<float> point(x.shape(), x.data() * alpha);
    total += input_gradient(net, weights, std::move(point), cls).data().cast<double>();
  }
  total /= static_cast<double>(steps);
  return Tensor<float>(x.shape(),
                       (x.data().cast<double>().array() * total.array()).cast<float>().matrix());
}

SaliencyMap integrated_gradients(const Network& net, const ModelWeights& weights,
                                 const Image& image, int cls, unsigned steps) {
  const Tensor<float> attr =
      integrated_gradients_attributions(net, weights, image, cls, steps);
  return normalize(channel_abs_max(attr, image.height, image.width));
}

double ssim(const SaliencyMap& a, const SaliencyMap& b, const SsimOptions& options) {
  check_same_shape(a, b, "ssim");
  if (a.rows() < options.window || a.cols() < options.window) {
    throw std::invalid_argument("ssim: maps smaller than the " +
                                std::to_string(options.window) + "x" +
                                std::to_string(options.window) + " window");
  }
  const auto w = gaussian_window(options.window, options.sigma);
  const double c1 = (0.01 * options.data_range) * (0.01 * options.data_range);
  const double c2 = (0.03 * options.data_range) * (0.03 * options.data_range);

  const SaliencyMap mu_a = filter_valid(a, w);
  const SaliencyMap mu_b = filter_valid(b, w);
  const SaliencyMap aa = filter_valid(a * a, w);
  const SaliencyMap bb = filter_valid(b * b, w);
  const SaliencyMap ab = filter_valid(a * b, w);

  double total = 0.0;
  for (Index i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a.data()[i], mb = mu_b.data()[i];
    const double va = aa.data()[i] - ma * ma;
    const double vb = bb.data()[i] - mb * mb;
    const double cov = ab.data()[i] - ma * mb;
    total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
             ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

double peak_overlap(const SaliencyMap& a, const SaliencyMap& b, double k_fraction) {
  check_same_shape(a, b, "peak_overlap");
  if (!(k_fraction > 0.0 && k_fraction < 1.0)) {
    throw std::invalid_argument("peak_overlap: k_fraction must lie in (0,1)");
  }
  const Index k = static_cast<Index>(std::llround(k_fraction * static_cast<double>(a.size())));
  if (k == 0) throw std::invalid_argument("peak_overlap: K rounds to 0");
  const auto ta = top_k(a, k), tb = top_k(b, k);
  std::vector<Index> common;
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(),
                        std::back_inserter(common));
  return 100.0 * static_cast<double>(common.size()) / static_cast<double>(k);
}

double l1_distance(const SaliencyMap& a, const SaliencyMap& b) {
  check_same_shape(a, b, "l1_distance");
  return (a - b).abs().mean();
}

ForegroundMask foreground_mask(const SaliencyMap& map, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("foreground_mask: tau must lie in (0,1)");
  }
  const Index n = map.size();
  std::vector<double> sorted(map.data(), map.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const Index k = std::clamp<Index>(
      static_cast<Index>(std::ceil(tau * static_cast<double>(n) - 1e-9)), 1, n);
  ForegroundMask fg;
  fg.tau = tau;
  fg.threshold = sorted[static_cast<std::size_t>(n - k)];
  fg.mask = map >= fg.threshold;
  return fg;
}

}  // namespace chromaskew::saliency
