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

#ifndef CHROMASKEW_ATTACK_HPP_
#define CHROMASKEW_ATTACK_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "chromaskew/color.hpp"
#include "chromaskew/dataset.hpp"
#include "chromaskew/image.hpp"
#include "chromaskew/network.hpp"
#include "chromaskew/tensor.hpp"

namespace chromaskew::attack {

using color::Operator;
using color::PerturbationParams;

// Discretized search space. Candidates are enumerated as identity, then each
// single operator, then (when `pairwise`) the hue x rescale, hue x jitter and
// rescale x jitter composites. Identity values inside the lists are ignored.
struct GridSpec {
  std::vector<double> hue{-0.15, -0.10, -0.05, 0.05, 0.10, 0.15};
  std::vector<double> scale{0.6, 0.8, 1.2, 1.4};
  // A rescale candidate touches one channel at a time and/or all three.
  bool scale_per_channel = true;
  bool scale_all_channels = true;
  std::vector<double> gamma{0.8, 1.0, 1.2};
  std::vector<double> beta{-0.1, 0.0, 0.1};
  bool use_hue = true;
  bool use_rescale = true;
  bool use_jitter = true;
  bool pairwise = true;
  color::OperatorOrder order = color::kDefaultOrder;
  std::size_t max_candidates = 500;

  static GridSpec identity_only();
  // The same value lists restricted to one operator, no composites.
  GridSpec only(Operator op) const;

  // Identity first; throws when the grid exceeds max_candidates or holds an
  // invalid parameter.
  std::vector<PerturbationParams> candidates() const;
};

struct AttackOutcome {
  PerturbationParams theta;
  std::size_t candidate = 0;
  int label = 0;
  double ssim = 1.0;
  std::size_t feasible = 1;
  double delta_e = 0.0;
  // Only the identity kept the prediction.
  bool fallback = true;
};

struct Perturbed {
  Image image;
  AttackOutcome outcome;
};

// Per-candidate record of an exhaustive scan. Infeasible candidates carry
// no SSIM.
struct CandidateScore {
  bool feasible = false;
  double ssim = 0.0;
};

std::vector<CandidateScore> score_candidates(const Network& net, const ModelWeights& weights,
                                             const Image& x,
                                             std::span<const PerturbationParams> candidates,
                                             const color::OperatorOrder& order,
                                             int* predicted = nullptr);

// The feasible candidate with the lowest Grad-CAM SSIM against the clean
// map; ties go to the earlier candidate.
Perturbed cpm_perturb(const Network& net, const ModelWeights& weights, const Image& x,
                      const GridSpec& grid);
Perturbed cpm_perturb(const Network& net, const ModelWeights& weights, const Image& x,
                      std::span<const PerturbationParams> candidates,
                      const color::OperatorOrder& order = color::kDefaultOrder);

struct PoisonSummary {
  std::size_t samples = 0;
  double mean_ssim = 1.0;
  double std_ssim = 0.0;
  double p10_ssim = 1.0;
  double median_ssim = 1.0;
  double p90_ssim = 1.0;
  double mean_delta_e = 0.0;
  // Fraction of samples with a feasible non-identity candidate.
  double success_rate = 0.0;
};

PoisonSummary summarize(std::span<const AttackOutcome> outcomes);

struct Poisoned {
  LabeledDataset dataset;
  std::vector<AttackOutcome> outcomes;
  PoisonSummary summary;
};

// Replace every image by its CPM output. Labels and masks are kept.
Poisoned poison_dataset(const Network& net, const ModelWeights& weights,
                        const LabeledDataset& dataset, const GridSpec& grid);

struct SkewRanges {
  double hue = 1.0 / 12.0;
  double saturation_lo = 0.5;
  double saturation_hi = 1.5;
  double channel_lo = 0.8;
  double channel_hi = 1.2;

  // Ranges contracted toward the identity by factor f in [0,1].
  SkewRanges scaled(double f) const;
};

struct SkewParams {
  std::optional<double> hue;
  std::optional<double> saturation;
  std::optional<std::array<double, 3>> channel;
};

// A nonempty random subset of {hue, saturation, channel}, each drawn
// uniformly from its range.
SkewParams sample_skew(std::uint64_t seed, const SkewRanges& ranges = {});
Image apply_skew(const Image& x, const SkewParams& params);
Image random_skew(const Image& x, std::uint64_t seed, const SkewRanges& ranges = {});

}  // namespace chromaskew::attack

#endif  // CHROMASKEW_ATTACK_HPP_
