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

#ifndef CHROMASKEW_AGGREGATE_HPP_
#define CHROMASKEW_AGGREGATE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chromaskew/tensor.hpp"

namespace chromaskew::fl {

enum class Aggregator { kFedAvg, kTrimmedMean, kMedian, kFlTrust };

std::string to_string(Aggregator a);
Aggregator parse_aggregator(const std::string& name);

namespace detail {

template <typename Scalar>
void check_updates(std::span<const Weights<Scalar>> updates, const char* what) {
  if (updates.empty()) throw std::invalid_argument(std::string(what) + ": no updates");
  for (const auto& u : updates) {
    if (!congruent(u, updates.front())) {
      throw std::invalid_argument(std::string(what) + ": update shapes differ");
    }
  }
}

// Applies `reduce` to the client values of every coordinate.
template <typename Scalar, typename Reduce>
Weights<Scalar> coordinatewise(std::span<const Weights<Scalar>> updates, Reduce&& reduce) {
  Weights<Scalar> out = updates.front();
  std::vector<double> column(updates.size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    for (Index j = 0; j < out[t].size(); ++j) {
      for (std::size_t c = 0; c < updates.size(); ++c) {
        column[c] = static_cast<double>(updates[c][t][j]);
      }
      out[t][j] = static_cast<Scalar>(reduce(column));
    }
  }
  return out;
}

}  // namespace detail

// sum_i n_i w_i / sum_i n_i, accumulated in double.
template <typename Scalar>
Weights<Scalar> fedavg(std::span<const Weights<Scalar>> updates,
                       std::span<const double> counts) {
  detail::check_updates(updates, "fedavg");
  if (counts.size() != updates.size()) {
    throw std::invalid_argument("fedavg: one sample count per update required");
  }
  double total = 0.0;
  for (double n : counts) {
    if (!(n > 0.0)) throw std::invalid_argument("fedavg: sample counts must be > 0");
    total += n;
  }
  return detail::coordinatewise(updates, [&](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t c = 0; c < v.size(); ++c) s += counts[c] * v[c];
    return s / total;
  });
}

// Per coordinate: drop the trim_k smallest and largest values, average the
// rest (summed in ascending order).
template <typename Scalar>
Weights<Scalar> trimmed_mean(std::span<const Weights<Scalar>> updates, std::size_t trim_k) {
  detail::check_updates(updates, "trimmed_mean");
  if (updates.size() <= 2 * trim_k) {
    throw std::invalid_argument("trimmed_mean: " + std::to_string(updates.size()) +
                                " clients cannot drop " + std::to_string(trim_k) +
                                " from each end");
  }
  return detail::coordinatewise(updates, [trim_k](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (std::size_t c = trim_k; c < v.size() - trim_k; ++c) s += v[c];
    return s / static_cast<double>(v.size() - 2 * trim_k);
  });
}

// Coordinate-wise median; the mean of the middle two for an even count.
template <typename Scalar>
Weights<Scalar> median(std::span<const Weights<Scalar>> updates) {
  detail::check_updates(updates, "median");
  return detail::coordinatewise(updates, [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
  });
}

template <typename Scalar>
struct FlTrustResult {
  Weights<Scalar> weights;
  std::vector<double> trust;
  // Server delta had zero norm; the global model was returned unchanged.
  bool skipped = false;
};

// Trust-weighted aggregation against a server update computed on clean root
// data. Trust is ReLU(cos(client delta, server delta)); client deltas are
// rescaled to the server delta's norm before averaging.
template <typename Scalar>
FlTrustResult<Scalar> fltrust(const Weights<Scalar>& global,
                              std::span<const Weights<Scalar>> updates,
                              const Weights<Scalar>& server_update) {
  detail::check_updates(updates, "fltrust");
  if (!congruent(global, updates.front()) || !congruent(global, server_update)) {
    throw std::invalid_argument("fltrust: update shapes differ from the global model");
  }
  const auto g = flatten<double>(global);
  std::vector<double> server(static_cast<std::size_t>(g.size()));
  const auto s_flat = flatten<double>(server_update);
  double s_norm2 = 0.0;
  for (Index j = 0; j < g.size(); ++j) {
    server[static_cast<std::size_t>(j)] = s_flat[j] - g[j];
    s_norm2 += server[static_cast<std::size_t>(j)] * server[static_cast<std::size_t>(j)];
  }
  FlTrustResult<Scalar> out;
  out.trust.assign(updates.size(), 0.0);
  if (s_norm2 == 0.0) {
    out.weights = global;
    out.skipped = true;
    return out;
  }
  const double s_norm = std::sqrt(s_norm2);

  std::vector<double> acc(server.size(), 0.0);
  double trust_total = 0.0;
  std::vector<double> delta(server.size());
  for (std::size_t c = 0; c < updates.size(); ++c) {
    const auto u = flatten<double>(updates[c]);
    double dot = 0.0, norm2 = 0.0;
    for (std::size_t j = 0; j < delta.size(); ++j) {
      delta[j] = u[static_cast<Index>(j)] - g[static_cast<Index>(j)];
      dot += delta[j] * server[j];
      norm2 += delta[j] * delta[j];
    }
    if (norm2 == 0.0) continue;
    const double norm = std::sqrt(norm2);
    const double trust = std::max(0.0, dot / (norm * s_norm));
    out.trust[c] = trust;
    if (trust == 0.0) continue;
    trust_total += trust;
    const double scale = trust * s_norm / norm;
    for (std::size_t j = 0; j < delta.size(); ++j) acc[j] += scale * delta[j];
  }
  Eigen::VectorXd next = g;
  if (trust_total > 0.0) {
    for (std::size_t j = 0; j < acc.size(); ++j) {
      next[static_cast<Index>(j)] += acc[j] / trust_total;
    }
  }
  out.weights = unflatten(next, global);
  return out;
}

}  // namespace chromaskew::fl

#endif  // CHROMASKEW_AGGREGATE_HPP_
