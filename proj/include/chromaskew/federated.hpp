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

#ifndef CHROMASKEW_FEDERATED_HPP_
#define CHROMASKEW_FEDERATED_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "chromaskew/aggregate.hpp"
#include "chromaskew/attack.hpp"
#include "chromaskew/dataset.hpp"
#include "chromaskew/network.hpp"
#include "chromaskew/tensor.hpp"

namespace chromaskew::fl {

enum class Role { kBenign, kAdversarial };

struct ClientState {
  int id = 0;
  Role role = Role::kBenign;
  LabeledDataset data;

  std::size_t samples() const { return data.size(); }
};

// FL clients search single-operator candidates only.
inline attack::GridSpec default_fl_grid() {
  attack::GridSpec grid;
  grid.pairwise = false;
  return grid;
}

struct FlConfig {
  std::size_t clients = 10;
  std::size_t selected = 5;
  unsigned local_epochs = 1;
  float learning_rate = 0.005f;
  unsigned batch = 32;
  unsigned rounds = 10;
  double adversarial_ratio = 0.0;
  Aggregator aggregator = Aggregator::kFedAvg;
  std::size_t trim_k = 1;
  attack::GridSpec grid = default_fl_grid();

  // Number of adversarial clients, round(r * N). Ids 0..count-1 attack.
  std::size_t adversaries() const;
  void validate() const;
};

struct MetricsConfig {
  double tau = 0.2;
  double k_fraction = 0.1;
  std::size_t probe = 100;
};

// Clients with roles assigned from the configured adversarial ratio.
std::vector<ClientState> make_clients(std::vector<LabeledDataset> parts,
                                      const FlConfig& config);

// K distinct ids out of N, drawn from the (seed, round) stream and returned
// in ascending order.
std::vector<std::size_t> select_clients(std::size_t n, std::size_t k, std::uint64_t seed,
                                        unsigned round);

struct RoundUpdate {
  ModelWeights weights;
  std::vector<std::size_t> selected;
  std::vector<attack::AttackOutcome> poisoned;
  bool skipped = false;
};

// One synchronous round: selected clients train from `global` (adversaries
// on their CPM-poisoned data), then the server aggregates. `root` is the
// server's clean dataset and is only used by FLTrust.
RoundUpdate run_round(const Network& net, const ModelWeights& global,
                      std::span<const ClientState> clients, const FlConfig& config,
                      unsigned round, std::uint64_t seed, const LabeledDataset* root);

struct RoundMetrics {
  unsigned round = 0;
  double adversarial_ratio = 0.0;
  double accuracy = 0.0;
  double reference_accuracy = 0.0;
  double fidelity = 100.0;
  double ssim_gc = 1.0;
  double ssim_gcpp = 1.0;
  double ssim_std = 0.0;
  double peak = 100.0;
  double l1 = 0.0;
  double drift = 0.0;
  double fallback_rate = 0.0;
};

struct ExplanationStats {
  double ssim_gc = 1.0;
  double ssim_gcpp = 1.0;
  double ssim_std = 0.0;
  double peak = 100.0;
  double l1 = 0.0;
};

// Compares each probe image's Grad-CAM/Grad-CAM++ under `candidate` against
// those under `reference`, both for the reference model's predicted class.
ExplanationStats compare_explanations(const Network& net, const ModelWeights& reference,
                                      const ModelWeights& candidate,
                                      std::span<const Sample> probe, double k_fraction);

// Mean over the probe of 1 - SSIM between the Grad-CAMs of the two models.
double saliency_drift(const Network& net, const ModelWeights& model_0,
                      const ModelWeights& model_t, std::span<const Sample> probe);

struct DriftPoint {
  double t = 0.0;
  double r = 0.0;
  double drift = 0.0;
};

struct DriftFit {
  double alpha = 0.0;
  // Centered coefficient of determination of the through-origin fit.
  double r2 = 0.0;
  std::size_t points = 0;
};

// Least-squares alpha for drift ~ alpha * r * t.
DriftFit fit_drift_slope(std::span<const DriftPoint> series);

struct FlSetup {
  Network network;
  ModelWeights initial;
  std::vector<LabeledDataset> client_data;
  LabeledDataset root;
  LabeledDataset test;
  LabeledDataset probe;
};

struct Simulation {
  std::vector<RoundMetrics> rounds;
  ModelWeights attacked;
  ModelWeights reference;
  DriftFit fit;
};

using RoundHook =
    std::function<void(unsigned round, const ModelWeights& reference, const ModelWeights& attacked)>;

// Runs the attacked federation and its vanilla twin (no adversaries, same
// seeds, same aggregator) in lockstep and scores the attacked global model
// against the twin after every round.
Simulation simulate(const FlSetup& setup, const FlConfig& config,
                    const MetricsConfig& metrics, std::uint64_t seed,
                    const RoundHook& hook = {});

}  // namespace chromaskew::fl

#endif  // CHROMASKEW_FEDERATED_HPP_
