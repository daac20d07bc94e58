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

#include "chromaskew/federated.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "chromaskew/model.hpp"
#include "chromaskew/rng.hpp"
#include "chromaskew/saliency.hpp"

namespace chromaskew::fl {

std::string to_string(Aggregator a) {
  switch (a) {
    case Aggregator::kFedAvg: return "fedavg";
    case Aggregator::kTrimmedMean: return "trimmed_mean";
    case Aggregator::kMedian: return "median";
    case Aggregator::kFlTrust: return "fltrust";
  }
  return "?";
}

Aggregator parse_aggregator(const std::string& name) {
  for (auto a : {Aggregator::kFedAvg, Aggregator::kTrimmedMean, Aggregator::kMedian,
                 Aggregator::kFlTrust}) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown aggregator '" + name + "'");
}

std::size_t FlConfig::adversaries() const {
  return static_cast<std::size_t>(std::llround(adversarial_ratio * static_cast<double>(clients)));
}

void FlConfig::validate() const {
  if (clients == 0) throw std::invalid_argument("fl.clients must be >= 1");
  if (selected == 0 || selected > clients) {
    throw std::invalid_argument("fl.selected must lie in [1, clients]");
  }
  if (rounds == 0) throw std::invalid_argument("fl.rounds must be >= 1");
  if (!(adversarial_ratio >= 0.0 && adversarial_ratio <= 1.0)) {
    throw std::invalid_argument("fl.adversarial_ratio must lie in [0,1]");
  }
  if (!(learning_rate > 0.0f)) throw std::invalid_argument("fl.learning_rate must be > 0");
  if (batch == 0) throw std::invalid_argument("fl.batch must be >= 1");
  if (aggregator == Aggregator::kTrimmedMean && selected <= 2 * trim_k) {
    throw std::invalid_argument("fl.trim_k too large for the selected client count");
  }
}

std::vector<ClientState> make_clients(std::vector<LabeledDataset> parts,
                                      const FlConfig& config) {
  if (parts.size() != config.clients) {
    throw std::invalid_argument("expected one dataset per client");
  }
  const std::size_t adversaries = config.adversaries();
  std::vector<ClientState> clients;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty()) {
      throw std::invalid_argument("client " + std::to_string(i) + " has no data");
    }
    clients.push_back(ClientState{static_cast<int>(i),
                                  i < adversaries ? Role::kAdversarial : Role::kBenign,
                                  std::move(parts[i])});
  }
  return clients;
}

std::vector<std::size_t> select_clients(std::size_t n, std::size_t k, std::uint64_t seed,
                                        unsigned round) {
  if (k == 0 || k > n) throw std::invalid_argument("cannot select " + std::to_string(k) +
                                                   " of " + std::to_string(n) + " clients");
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  Rng rng(derive_seed(seed, {round, 0x5e1ec7}));
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(ids[i], ids[i + rng.index(n - i)]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

RoundUpdate run_round(const Network& net, const ModelWeights& global,
                      std::span<const ClientState> clients, const FlConfig& config,
                      unsigned round, std::uint64_t seed, const LabeledDataset* root) {
  RoundUpdate out;
  out.selected = select_clients(clients.size(), config.selected, seed, round);
  if (out.selected.empty()) throw std::invalid_argument("empty client selection");

  const std::size_t k = out.selected.size();
  std::vector<ModelWeights> updates(k);
  std::vector<double> counts(k);
  std::vector<std::vector<attack::AttackOutcome>> poisoned(k);
  const auto n = static_cast<std::ptrdiff_t>(k);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto slot = static_cast<std::size_t>(i);
    const ClientState& client = clients[out.selected[slot]];
    const TrainOptions opts{config.local_epochs, config.learning_rate, config.batch,
                            derive_seed(seed, {round, static_cast<std::uint64_t>(client.id)})};
    counts[slot] = static_cast<double>(client.samples());
    if (client.role == Role::kAdversarial) {
      auto p = attack::poison_dataset(net, global, client.data, config.grid);
      poisoned[slot] = std::move(p.outcomes);
      updates[slot] = train(net, global, p.dataset, opts);
    } else {
      updates[slot] = train(net, global, client.data, opts);
    }
  }
  for (auto& p : poisoned) out.poisoned.insert(out.poisoned.end(), p.begin(), p.end());

  const std::span<const ModelWeights> u(updates);
  switch (config.aggregator) {
    case Aggregator::kFedAvg:
      out.weights = fedavg<float>(u, counts);
      break;
    case Aggregator::kTrimmedMean:
      out.weights = trimmed_mean<float>(u, config.trim_k);
      break;
    case Aggregator::kMedian:
      out.weights = median<float>(u);
      break;
    case Aggregator::kFlTrust: {
      if (root == nullptr || root->empty()) {
        throw std::invalid_argument("fltrust needs a server root dataset");
      }
      const TrainOptions opts{config.local_epochs, config.learning_rate, config.batch,
                              derive_seed(seed, {round, 0xf1u})};
      const ModelWeights server = train(net, global, *root, opts);
      auto r = fltrust<float>(global, u, server);
      if (r.skipped) {
        std::cerr << "warning: round " << round
                  << " skipped, server update has zero norm\n";
      }
      out.skipped = r.skipped;
      out.weights = std::move(r.weights);
      break;
    }
  }
  return out;
}

ExplanationStats compare_explanations(const Network& net, const ModelWeights& reference,
                                      const ModelWeights& candidate,
                                      std::span<const Sample> probe, double k_fraction) {
  if (probe.empty()) throw std::invalid_argument("probe set is empty");
  const std::size_t n = probe.size();
  std::vector<double> gc(n), pp(n), peak(n), l1(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const Image& x = probe[k].image;
    auto ref_pass = saliency::capture_pass(net, reference, x);
    const int cls = argmax(ref_pass.tape.value(ref_pass.logits));
    const auto ref = saliency::raw_cams(ref_pass, net, cls);
    auto cand_pass = saliency::capture_pass(net, candidate, x);
    const auto cand = saliency::raw_cams(cand_pass, net, cls);
    const auto a = saliency::finish(ref.grad_cam, net);
    const auto b = saliency::finish(cand.grad_cam, net);
    gc[k] = saliency::ssim(a, b);
    pp[k] = saliency::ssim(saliency::finish(ref.grad_cam_pp, net),
                           saliency::finish(cand.grad_cam_pp, net));
    peak[k] = saliency::peak_overlap(a, b, k_fraction);
    l1[k] = saliency::l1_distance(a, b);
  }
  auto mean = [n](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(n);
  };
  ExplanationStats s;
  s.ssim_gc = mean(gc);
  s.ssim_gcpp = mean(pp);
  s.peak = mean(peak);
  s.l1 = mean(l1);
  double sq = 0.0;
  for (double x : gc) sq += (x - s.ssim_gc) * (x - s.ssim_gc);
  s.ssim_std = std::sqrt(sq / static_cast<double>(n));
  return s;
}

double saliency_drift(const Network& net, const ModelWeights& model_0,
                      const ModelWeights& model_t, std::span<const Sample> probe) {
  if (probe.empty()) throw std::invalid_argument("probe set is empty");
  std::vector<double> d(probe.size());
  const auto count = static_cast<std::ptrdiff_t>(probe.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const Image& x = probe[k].image;
    auto pass0 = saliency::capture_pass(net, model_0, x);
    const int cls = argmax(pass0.tape.value(pass0.logits));
    const auto a = saliency::finish(saliency::raw_cams(pass0, net, cls).grad_cam, net);
    auto pass_t = saliency::capture_pass(net, model_t, x);
    const auto b = saliency::finish(saliency::raw_cams(pass_t, net, cls).grad_cam, net);
    d[k] = 1.0 - saliency::ssim(a, b);
  }
  double s = 0.0;
  for (double v : d) s += v;
  return s / static_cast<double>(d.size());
}

DriftFit fit_drift_slope(std::span<const DriftPoint> series) {
  double sxy = 0.0, sxx = 0.0;
  for (const auto& p : series) {
    const double x = p.r * p.t;
    sxy += x * p.drift;
    sxx += x * x;
  }
  if (sxx == 0.0) throw std::invalid_argument("drift fit needs at least one point with r*t > 0");
  DriftFit fit;
  fit.points = series.size();
  fit.alpha = sxy / sxx;
  double mean = 0.0;
  for (const auto& p : series) mean += p.drift;
  mean /= static_cast<double>(series.size());
  double sse = 0.0, sst = 0.0;
  for (const auto& p : series) {
    const double e = p.drift - fit.alpha * p.r * p.t;
    sse += e * e;
    sst += (p.drift - mean) * (p.drift - mean);
  }
  fit.r2 = sst > 0.0 ? 1.0 - sse / sst : (sse == 0.0 ? 1.0 : 0.0);
  return fit;
}

Simulation simulate(const FlSetup& setup, const FlConfig& config,
                    const MetricsConfig& metrics, std::uint64_t seed,
                    const RoundHook& hook) {
  config.validate();
  const Network& net = setup.network;
  const auto attacked_clients = make_clients(setup.client_data, config);
  FlConfig vanilla = config;
  vanilla.adversarial_ratio = 0.0;
  const auto vanilla_clients = make_clients(setup.client_data, vanilla);
  const bool has_adversaries = config.adversaries() > 0;
  const std::size_t probe_n = std::min(metrics.probe, setup.probe.size());
  const std::span<const Sample> probe(setup.probe.samples.data(), probe_n);

  Simulation sim;
  sim.reference = setup.initial;
  sim.attacked = setup.initial;
  std::vector<DriftPoint> drift;
  for (unsigned t = 1; t <= config.rounds; ++t) {
    sim.reference =
        run_round(net, sim.reference, vanilla_clients, vanilla, t, seed, &setup.root).weights;
    double fallback = 0.0;
    if (has_adversaries) {
      auto r = run_round(net, sim.attacked, attacked_clients, config, t, seed, &setup.root);
      sim.attacked = std::move(r.weights);
      if (!r.poisoned.empty()) fallback = 1.0 - attack::summarize(r.poisoned).success_rate;
    } else {
      sim.attacked = sim.reference;
    }

    RoundMetrics m;
    m.round = t;
    m.adversarial_ratio = config.adversarial_ratio;
    m.fallback_rate = fallback;
    const auto ref_pred = predict_labels(net, sim.reference, setup.test.samples);
    const auto att_pred =
        has_adversaries ? predict_labels(net, sim.attacked, setup.test.samples) : ref_pred;
    std::size_t ref_ok = 0, att_ok = 0, agree = 0;
    for (std::size_t i = 0; i < ref_pred.size(); ++i) {
      ref_ok += ref_pred[i] == setup.test.samples[i].label;
      att_ok += att_pred[i] == setup.test.samples[i].label;
      agree += ref_pred[i] == att_pred[i];
    }
    const double n_test = static_cast<double>(std::max<std::size_t>(ref_pred.size(), 1));
    m.reference_accuracy = 100.0 * static_cast<double>(ref_ok) / n_test;
    m.accuracy = 100.0 * static_cast<double>(att_ok) / n_test;
    m.fidelity = 100.0 * static_cast<double>(agree) / n_test;
    const auto stats =
        compare_explanations(net, sim.reference, sim.attacked, probe, metrics.k_fraction);
    m.ssim_gc = stats.ssim_gc;
    m.ssim_gcpp = stats.ssim_gcpp;
    m.ssim_std = stats.ssim_std;
    m.peak = stats.peak;
    m.l1 = stats.l1;
    m.drift = 1.0 - stats.ssim_gc;
    sim.rounds.push_back(m);
    drift.push_back(DriftPoint{static_cast<double>(t), config.adversarial_ratio, m.drift});
    if (hook) hook(t, sim.reference, sim.attacked);
  }
  if (has_adversaries) sim.fit = fit_drift_slope(drift);
  return sim;
}

}  // namespace chromaskew::fl
