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

#include "chromaskew/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "chromaskew/model.hpp"
#include "chromaskew/rng.hpp"
#include "chromaskew/saliency.hpp"

namespace chromaskew::attack {
namespace {

std::vector<PerturbationParams> hue_options(const GridSpec& g) {
  std::vector<PerturbationParams> out;
  if (!g.use_hue) return out;
  for (double d : g.hue) {
    PerturbationParams p;
    p.hue = d;
    if (!p.hue_is_identity()) out.push_back(p);
  }
  return out;
}

std::vector<PerturbationParams> rescale_options(const GridSpec& g) {
  std::vector<PerturbationParams> out;
  if (!g.use_rescale) return out;
  for (double a : g.scale) {
    if (a == 1.0) continue;
    if (g.scale_per_channel) {
      for (int c = 0; c < 3; ++c) {
        PerturbationParams p;
        p.scale[static_cast<std::size_t>(c)] = a;
        out.push_back(p);
      }
    }
    if (g.scale_all_channels) {
      PerturbationParams p;
      p.scale = {a, a, a};
      out.push_back(p);
    }
  }
  return out;
}

std::vector<PerturbationParams> jitter_options(const GridSpec& g) {
  std::vector<PerturbationParams> out;
  if (!g.use_jitter) return out;
  for (double gm : g.gamma) {
    for (double b : g.beta) {
      PerturbationParams p;
      p.contrast = gm;
      p.brightness = b;
      if (!p.jitter_is_identity()) out.push_back(p);
    }
  }
  return out;
}

PerturbationParams merge(const PerturbationParams& a, const PerturbationParams& b) {
  PerturbationParams m = a;
  if (!b.hue_is_identity()) m.hue = b.hue;
  if (!b.scale_is_identity()) m.scale = b.scale;
  if (!b.jitter_is_identity()) {
    m.contrast = b.contrast;
    m.brightness = b.brightness;
  }
  return m;
}

void append_pairs(std::vector<PerturbationParams>& out,
                  const std::vector<PerturbationParams>& a,
                  const std::vector<PerturbationParams>& b) {
  for (const auto& x : a) {
    for (const auto& y : b) out.push_back(merge(x, y));
  }
}

double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) return 1.0;
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

GridSpec GridSpec::identity_only() {
  GridSpec g;
  g.use_hue = g.use_rescale = g.use_jitter = false;
  return g;
}

GridSpec GridSpec::only(Operator op) const {
  GridSpec g = *this;
  g.use_hue = op == Operator::kHue;
  g.use_rescale = op == Operator::kRescale;
  g.use_jitter = op == Operator::kJitter;
  g.pairwise = false;
  return g;
}

std::vector<PerturbationParams> GridSpec::candidates() const {
  const auto h = hue_options(*this), r = rescale_options(*this), j = jitter_options(*this);
  std::vector<PerturbationParams> out{PerturbationParams::identity()};
  for (const auto* list : {&h, &r, &j}) out.insert(out.end(), list->begin(), list->end());
  if (pairwise) {
    append_pairs(out, h, r);
    append_pairs(out, h, j);
    append_pairs(out, r, j);
  }
  std::vector<PerturbationParams> unique;
  unique.reserve(out.size());
  for (const auto& p : out) {
    if (std::find(unique.begin(), unique.end(), p) == unique.end()) unique.push_back(p);
  }
  if (unique.size() > max_candidates) {
    throw std::invalid_argument("grid has " + std::to_string(unique.size()) +
                                " candidates, limit is " + std::to_string(max_candidates));
  }
  for (const auto& p : unique) p.validate();
  return unique;
}

std::vector<CandidateScore> score_candidates(const Network& net, const ModelWeights& weights,
                                             const Image& x,
                                             std::span<const PerturbationParams> candidates,
                                             const color::OperatorOrder& order,
                                             int* predicted) {
  auto pass0 = saliency::capture_pass(net, weights, x);
  const int label = argmax(pass0.tape.value(pass0.logits));
  if (predicted) *predicted = label;
  const saliency::SaliencyMap cam0 =
      saliency::finish(saliency::raw_cams(pass0, net, label).grad_cam, net);

  std::vector<CandidateScore> scores(candidates.size());
  const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& theta = candidates[static_cast<std::size_t>(i)];
    if (theta.is_identity()) {
      scores[static_cast<std::size_t>(i)] = {true, 1.0};
      continue;
    }
    auto pass = saliency::capture_pass(net, weights, color::apply(theta, x, order));
    if (argmax(pass.tape.value(pass.logits)) != label) continue;
    const auto cam = saliency::finish(saliency::raw_cams(pass, net, label).grad_cam, net);
    scores[static_cast<std::size_t>(i)] = {true, saliency::ssim(cam0, cam)};
  }
  return scores;
}

Perturbed cpm_perturb(const Network& net, const ModelWeights& weights, const Image& x,
                      std::span<const PerturbationParams> candidates,
                      const color::OperatorOrder& order) {
  if (candidates.empty() || !candidates.front().is_identity()) {
    throw std::invalid_argument("candidate list must start with the identity");
  }
  int label = 0;
  const auto scores = score_candidates(net, weights, x, candidates, order, &label);
  AttackOutcome out;
  out.label = label;
  out.feasible = 0;
  std::size_t best = 0;
  double best_ssim = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!scores[i].feasible) continue;
    ++out.feasible;
    if (scores[i].ssim < best_ssim) {
      best_ssim = scores[i].ssim;
      best = i;
    }
  }
  out.fallback = out.feasible == 1;
  if (out.fallback) best = 0;
  out.candidate = best;
  out.theta = candidates[best];
  if (best == 0) {
    out.ssim = 1.0;
    return Perturbed{x, out};
  }
  out.ssim = best_ssim;
  Image perturbed = color::apply(out.theta, x, order);
  out.delta_e = color::mean_delta_e(x, perturbed);
  return Perturbed{std::move(perturbed), out};
}

Perturbed cpm_perturb(const Network& net, const ModelWeights& weights, const Image& x,
                      const GridSpec& grid) {
  const auto candidates = grid.candidates();
  return cpm_perturb(net, weights, x, candidates, grid.order);
}

PoisonSummary summarize(std::span<const AttackOutcome> outcomes) {
  PoisonSummary s;
  s.samples = outcomes.size();
  if (outcomes.empty()) return s;
  std::vector<double> v;
  v.reserve(outcomes.size());
  double de = 0.0, success = 0.0;
  for (const auto& o : outcomes) {
    v.push_back(o.ssim);
    de += o.delta_e;
    success += o.fallback ? 0.0 : 1.0;
  }
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean_ssim = sum / n;
  double sq = 0.0;
  for (double x : v) sq += (x - s.mean_ssim) * (x - s.mean_ssim);
  s.std_ssim = std::sqrt(sq / n);
  std::sort(v.begin(), v.end());
  s.p10_ssim = quantile_sorted(v, 0.1);
  s.median_ssim = quantile_sorted(v, 0.5);
  s.p90_ssim = quantile_sorted(v, 0.9);
  s.mean_delta_e = de / n;
  s.success_rate = success / n;
  return s;
}

Poisoned poison_dataset(const Network& net, const ModelWeights& weights,
                        const LabeledDataset& dataset, const GridSpec& grid) {
  if (dataset.empty()) throw std::invalid_argument("cannot poison an empty dataset");
  const auto candidates = grid.candidates();
  Poisoned out;
  out.dataset = dataset;
  out.outcomes.resize(dataset.size());
  const auto n = static_cast<std::ptrdiff_t>(dataset.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    auto r = cpm_perturb(net, weights, dataset.samples[k].image, candidates, grid.order);
    out.dataset.samples[k].image = std::move(r.image);
    out.outcomes[k] = r.outcome;
  }
  out.summary = summarize(out.outcomes);
  return out;
}

SkewRanges SkewRanges::scaled(double f) const {
  if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("skew scale must lie in [0,1]");
  auto shrink = [f](double v) { return 1.0 + f * (v - 1.0); };
  return SkewRanges{hue * f, shrink(saturation_lo), shrink(saturation_hi),
                    shrink(channel_lo), shrink(channel_hi)};
}

SkewParams sample_skew(std::uint64_t seed, const SkewRanges& ranges) {
  Rng rng(seed);
  const auto subset = 1 + rng.index(7);
  SkewParams p;
  if (subset & 1u) p.hue = rng.uniform(-ranges.hue, ranges.hue);
  if (subset & 2u) p.saturation = rng.uniform(ranges.saturation_lo, ranges.saturation_hi);
  if (subset & 4u) {
    std::array<double, 3> c{};
    for (double& v : c) v = rng.uniform(ranges.channel_lo, ranges.channel_hi);
    p.channel = c;
  }
  return p;
}

Image apply_skew(const Image& x, const SkewParams& params) {
  Image out = x;
  if (params.hue) out = color::hue_shift(out, *params.hue);
  if (params.saturation) out = color::saturation_scale(out, *params.saturation);
  if (params.channel) out = color::channel_rescale(out, *params.channel);
  return out;
}

Image random_skew(const Image& x, std::uint64_t seed, const SkewRanges& ranges) {
  return apply_skew(x, sample_skew(seed, ranges));
}

}  // namespace chromaskew::attack
