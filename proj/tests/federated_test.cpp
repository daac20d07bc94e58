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

#include <algorithm>
#include <cmath>
#include <set>

#include "chromaskew/aggregate.hpp"
#include "chromaskew/data.hpp"
#include "chromaskew/federated.hpp"
#include "chromaskew/model.hpp"
#include "chromaskew/rng.hpp"

namespace chromaskew::fl {
namespace {

// Parameters on a 1/64 lattice keep every sum exact in any order.
ModelWeights lattice_weights(Rng& rng, const std::vector<Shape>& shapes) {
  ModelWeights w;
  for (const auto& s : shapes) {
    Tensor<float> t(s);
    for (Index i = 0; i < t.size(); ++i) {
      t[i] = static_cast<float>(static_cast<double>(rng.index(257)) / 64.0 - 2.0);
    }
    w.push_back(std::move(t));
  }
  return w;
}

const std::vector<Shape> kShapes{{3, 2}, {4}, {2, 2, 2}};

std::vector<ModelWeights> random_updates(Rng& rng, std::size_t n) {
  std::vector<ModelWeights> u;
  for (std::size_t i = 0; i < n; ++i) u.push_back(lattice_weights(rng, kShapes));
  return u;
}

std::vector<double> column(const std::vector<ModelWeights>& u, std::size_t t, Index i) {
  std::vector<double> c;
  for (const auto& w : u) c.push_back(w[t][i]);
  return c;
}

TEST(AggregateTest, HandExamples) {
  std::vector<ModelWeights> u;
  for (float v : {1.0f, 2.0f, 3.0f, 4.0f, 100.0f}) u.push_back({Tensor<float>::constant({1}, v)});
  EXPECT_EQ(trimmed_mean<float>(u, 1)[0][0], 3.0f);
  EXPECT_EQ(median<float>(u)[0][0], 3.0f);
  u.pop_back();
  EXPECT_EQ(median<float>(u)[0][0], 2.5f);
  const std::vector<double> counts{1, 1, 1, 5};
  EXPECT_EQ(fedavg<float>(u, counts)[0][0], 26.0f / 8.0f);
}

TEST(AggregateTest, MatchBruteForceOracles) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto u = random_updates(rng, 5);
    const auto med = median<float>(u);
    const auto tm = trimmed_mean<float>(u, 1);
    const auto tm2 = trimmed_mean<float>(u, 2);
    for (std::size_t t = 0; t < kShapes.size(); ++t) {
      for (Index i = 0; i < u[0][t].size(); ++i) {
        auto c = column(u, t, i);
        // Median: the value with at least three entries <= and >= it.
        double m = 0.0;
        for (double v : c) {
          const auto le = std::count_if(c.begin(), c.end(), [v](double x) { return x <= v; });
          const auto ge = std::count_if(c.begin(), c.end(), [v](double x) { return x >= v; });
          if (le >= 3 && ge >= 3) m = v;
        }
        EXPECT_EQ(med[t][i], static_cast<float>(m));
        // Trimmed mean: remove one minimum and one maximum by search.
        auto rest = c;
        rest.erase(std::min_element(rest.begin(), rest.end()));
        rest.erase(std::max_element(rest.begin(), rest.end()));
        double s = 0.0;
        for (double v : rest) s += v;
        EXPECT_EQ(tm[t][i], static_cast<float>(s / 3.0));
        EXPECT_EQ(tm2[t][i], static_cast<float>(m));
      }
    }
  }
}

TEST(AggregateTest, TrimZeroEqualsUnweightedFedAvg) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ModelWeights> u;
    for (int c = 0; c < 5; ++c) {
      ModelWeights w;
      for (const auto& s : kShapes) {
        Tensor<float> t(s);
        for (Index i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.uniform(-1, 1));
        w.push_back(t);
      }
      u.push_back(w);
    }
    const auto a = trimmed_mean<float>(u, 0);
    const std::vector<double> counts(5, 37.0);
    const auto b = fedavg<float>(u, counts);
    for (std::size_t t = 0; t < a.size(); ++t) {
      EXPECT_LE((a[t].data() - b[t].data()).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(AggregateTest, FlTrustMatchesClosedForm) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto global = lattice_weights(rng, kShapes);
    const auto server = lattice_weights(rng, kShapes);
    auto u = random_updates(rng, 5);
    if (trial % 5 == 0) u[1] = global;
    const auto r = fltrust<float>(global, u, server);
    ASSERT_FALSE(r.skipped);
    const auto g = flatten<double>(global);
    const Eigen::VectorXd s = flatten<double>(server) - g;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(g.size());
    double total = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) {
      const Eigen::VectorXd d = flatten<double>(u[c]) - g;
      double ts = 0.0;
      if (d.norm() > 0.0) ts = std::max(0.0, d.dot(s) / (d.norm() * s.norm()));
      EXPECT_NEAR(r.trust[c], ts, 1e-12);
      if (ts > 0.0) acc += ts * (s.norm() / d.norm()) * d;
      total += ts;
    }
    const Eigen::VectorXd expected = total > 0.0 ? Eigen::VectorXd(g + acc / total) : g;
    const auto got = flatten<double>(r.weights);
    for (Index j = 0; j < g.size(); ++j) EXPECT_EQ(got[j], static_cast<float>(expected[j]));
  }
}

TEST(AggregateTest, FlTrustEdgeCases) {
  Rng rng(4);
  const auto global = lattice_weights(rng, kShapes);
  auto u = random_updates(rng, 3);
  const auto skipped = fltrust<float>(global, u, global);
  EXPECT_TRUE(skipped.skipped);
  EXPECT_EQ(skipped.weights, global);
  // Every client opposite to the server: zero trust, global kept.
  ModelWeights server = global, away = global;
  for (std::size_t t = 0; t < global.size(); ++t) {
    server[t].data().array() += 0.5f;
    away[t].data().array() -= 0.5f;
  }
  const std::vector<ModelWeights> opposed{away, away};
  const auto r = fltrust<float>(global, opposed, server);
  EXPECT_EQ(r.weights, global);
  EXPECT_EQ(r.trust, (std::vector<double>{0.0, 0.0}));
}

TEST(AggregateTest, Errors) {
  Rng rng(5);
  const auto u = random_updates(rng, 4);
  EXPECT_THROW(trimmed_mean<float>(u, 2), std::invalid_argument);
  EXPECT_THROW(median<float>(std::span<const ModelWeights>{}), std::invalid_argument);
  EXPECT_THROW(fedavg<float>(u, std::vector<double>{1, 1, 0, 1}), std::invalid_argument);
  EXPECT_THROW(fedavg<float>(u, std::vector<double>{1, 1}), std::invalid_argument);
  auto bad = u;
  bad[2].pop_back();
  EXPECT_THROW(median<float>(bad), std::invalid_argument);
  EXPECT_EQ(parse_aggregator(to_string(Aggregator::kFlTrust)), Aggregator::kFlTrust);
  EXPECT_THROW(parse_aggregator("krum"), std::invalid_argument);
}

TEST(FederatedTest, ClientSelection) {
  for (unsigned round = 1; round <= 30; ++round) {
    const auto s = select_clients(10, 5, 42, round);
    ASSERT_EQ(s.size(), 5u);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 5u);
    EXPECT_LT(s.back(), 10u);
    EXPECT_EQ(s, select_clients(10, 5, 42, round));
  }
  EXPECT_NE(select_clients(10, 5, 42, 1), select_clients(10, 5, 42, 2));
  EXPECT_EQ(select_clients(4, 4, 1, 1), (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(FederatedTest, ConfigAndRoles) {
  FlConfig cfg;
  cfg.adversarial_ratio = 0.3;
  EXPECT_EQ(cfg.adversaries(), 3u);
  const auto parts = data::partition(data::generate_shapes(40, 4, 16, 1), 10,
                                     data::PartitionMode::kIid, 1);
  const auto clients = make_clients(parts, cfg);
  for (const auto& c : clients) {
    EXPECT_EQ(c.role == Role::kAdversarial, c.id < 3);
  }
  FlConfig bad;
  bad.selected = 11;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = FlConfig{};
  bad.adversarial_ratio = 1.5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = FlConfig{};
  bad.aggregator = Aggregator::kTrimmedMean;
  bad.trim_k = 3;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_THROW(make_clients(std::vector<LabeledDataset>(3), cfg), std::invalid_argument);
}

TEST(FederatedTest, DriftFit) {
  std::vector<DriftPoint> pts;
  for (double r : {0.1, 0.3, 0.5}) {
    for (int t = 1; t <= 5; ++t) pts.push_back({static_cast<double>(t), r, 0.02 * r * t});
  }
  const auto fit = fit_drift_slope(pts);
  EXPECT_NEAR(fit.alpha, 0.02, 1e-12);
  EXPECT_NEAR(fit.r2, 1.0, 1e-12);
  EXPECT_EQ(fit.points, pts.size());
  const std::vector<DriftPoint> flat{{1, 0, 0.1}, {2, 0, 0.2}};
  EXPECT_THROW(fit_drift_slope(flat), std::invalid_argument);
}

FlSetup tiny_setup() {
  FlSetup s;
  const Model m = build({Architecture::kA, 16, 4, ""}, 1);
  s.network = m.network;
  const auto train = data::generate_shapes(80, 4, 16, 2);
  s.initial = chromaskew::train(m.network, m.weights, train, {2, 0.05f, 16, 3});
  s.client_data = data::partition(data::generate_shapes(60, 4, 16, 4), 4,
                                  data::PartitionMode::kIid, 5);
  s.root = data::generate_shapes(8, 4, 16, 6);
  s.test = data::generate_shapes(20, 4, 16, 7);
  s.probe = data::head(s.test, 6);
  return s;
}

FlConfig tiny_config(double r, Aggregator agg = Aggregator::kFedAvg) {
  FlConfig c;
  c.clients = 4;
  c.selected = 3;
  c.rounds = 2;
  c.batch = 8;
  c.learning_rate = 0.02f;
  c.adversarial_ratio = r;
  c.aggregator = agg;
  c.grid.pairwise = false;
  return c;
}

TEST(FederatedTest, CleanFederationMatchesItself) {
  const auto setup = tiny_setup();
  unsigned hooks = 0;
  const auto sim = simulate(setup, tiny_config(0.0), {0.2, 0.1, 6}, 9,
                            [&](unsigned, const ModelWeights& a, const ModelWeights& b) {
                              ++hooks;
                              EXPECT_EQ(a, b);
                            });
  EXPECT_EQ(hooks, 2u);
  ASSERT_EQ(sim.rounds.size(), 2u);
  for (const auto& m : sim.rounds) {
    EXPECT_EQ(m.ssim_gc, 1.0);
    EXPECT_EQ(m.ssim_gcpp, 1.0);
    EXPECT_EQ(m.peak, 100.0);
    EXPECT_EQ(m.l1, 0.0);
    EXPECT_EQ(m.drift, 0.0);
    EXPECT_EQ(m.fidelity, 100.0);
    EXPECT_EQ(m.accuracy, m.reference_accuracy);
  }
  EXPECT_EQ(sim.attacked, sim.reference);
}

TEST(FederatedTest, AttackedRunIsDeterministicAndDiverges) {
  const auto setup = tiny_setup();
  for (auto agg : {Aggregator::kFedAvg, Aggregator::kFlTrust}) {
    const auto a = simulate(setup, tiny_config(0.5, agg), {0.2, 0.1, 6}, 9);
    const auto b = simulate(setup, tiny_config(0.5, agg), {0.2, 0.1, 6}, 9);
    EXPECT_EQ(a.attacked, b.attacked);
    EXPECT_EQ(a.rounds.back().ssim_gc, b.rounds.back().ssim_gc);
    EXPECT_FALSE(a.attacked == a.reference);
    for (const auto& m : a.rounds) {
      EXPECT_LE(m.ssim_gc, 1.0);
      EXPECT_GE(m.fallback_rate, 0.0);
      EXPECT_LE(m.fallback_rate, 1.0);
    }
  }
}

TEST(FederatedTest, RoundUpdateReportsPoisonedClients) {
  const auto setup = tiny_setup();
  const auto cfg = tiny_config(0.5);
  const auto clients = make_clients(setup.client_data, cfg);
  const auto u = run_round(setup.network, setup.initial, clients, cfg, 1, 9, &setup.root);
  std::size_t adversarial = 0;
  for (auto id : u.selected) adversarial += clients[id].role == Role::kAdversarial;
  std::size_t poisoned_samples = 0;
  for (auto id : u.selected) {
    if (clients[id].role == Role::kAdversarial) poisoned_samples += clients[id].samples();
  }
  EXPECT_EQ(u.poisoned.size(), poisoned_samples);
  EXPECT_EQ(u.selected, select_clients(4, 3, 9, 1));
}

}  // namespace
}  // namespace chromaskew::fl
