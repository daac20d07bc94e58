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

// Finite-difference checking of tape primitives in double precision.

#ifndef CHROMASKEW_TESTS_GRADCHECK_HPP_
#define CHROMASKEW_TESTS_GRADCHECK_HPP_

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "chromaskew/ops.hpp"
#include "chromaskew/tape.hpp"
#include "test_util.hpp"

namespace chromaskew::testing {

using Builder = std::function<Var(Tape<double>&, const std::vector<Var>&)>;

struct GradcheckResult {
  // Largest |a - n| - (1e-6 + rtol |n|) over all inputs; <= 0 passes.
  double excess = 0.0;
  std::size_t checked = 0;
};

// Scalarizes the op's output with fixed random coefficients and compares the
// tape gradient of every input with central differences.
inline GradcheckResult gradcheck(const Builder& build, const std::vector<Tensor<double>>& inputs,
                                 std::uint64_t seed, double h = 1e-4, double rtol = 1e-3) {
  std::optional<Tensor<double>> coeff;
  auto loss = [&](const std::vector<Tensor<double>>& in, Tape<double>& tape,
                  std::vector<Var>& leaves) {
    leaves.clear();
    for (const auto& t : in) leaves.push_back(tape.leaf(t));
    const Var y = build(tape, leaves);
    const Index n = tape.value(y).size();
    if (!coeff) {
      Rng rng(seed);
      coeff = random_tensor(rng, {1, n});
    }
    const Var c = tape.leaf(*coeff);
    const Var zero = tape.leaf(Tensor<double>(Shape{1}));
    return dense(tape, y, c, zero);
  };

  Tape<double> tape;
  std::vector<Var> leaves;
  const Var out = loss(inputs, tape, leaves);
  const auto analytic = tape.gradients(out, leaves);

  GradcheckResult r{-1.0, 0};
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto f = [&](const Tensor<double>& xk) {
      auto in = inputs;
      in[k] = xk;
      Tape<double> t;
      std::vector<Var> l;
      const Var o = loss(in, t, l);
      return t.value(o)[0];
    };
    const auto numeric = numeric_gradient(f, inputs[k], h);
    r.excess = std::max(r.excess, gradcheck_excess(analytic[k], numeric, rtol));
    r.checked += static_cast<std::size_t>(numeric.size());
  }
  return r;
}

// Values bounded away from zero so ReLU kinks do not straddle +-h.
inline Tensor<double> away_from_zero(Rng& rng, Shape shape) {
  Tensor<double> t(std::move(shape));
  for (Index i = 0; i < t.size(); ++i) {
    const double mag = rng.uniform(0.05, 1.0);
    t[i] = rng.uniform() < 0.5 ? -mag : mag;
  }
  return t;
}

// Distinct values spaced 0.01 apart in random order, so every pooling
// window has a unique maximum well separated from the rest.
inline Tensor<double> distinct_values(Rng& rng, Shape shape) {
  Tensor<double> t(std::move(shape));
  std::vector<double> v(static_cast<std::size_t>(t.size()));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = -1.0 + 0.01 * static_cast<double>(i);
  rng.shuffle(v);
  for (Index i = 0; i < t.size(); ++i) t[i] = v[static_cast<std::size_t>(i)];
  return t;
}

struct PrimitiveCase {
  std::string name;
  std::function<GradcheckResult(Rng&, std::uint64_t)> run;
};

// One random instance generator per differentiable primitive.
inline std::vector<PrimitiveCase> primitive_cases() {
  std::vector<PrimitiveCase> cases;
  cases.push_back({"conv2d", [](Rng& rng, std::uint64_t seed) {
    const Index cin = 1 + static_cast<Index>(rng.index(3));
    const Index cout = 1 + static_cast<Index>(rng.index(3));
    const Index k = rng.uniform() < 0.5 ? 1 : 3;
    const Index h = 3 + static_cast<Index>(rng.index(4)), w = 3 + static_cast<Index>(rng.index(4));
    return gradcheck([](Tape<double>& t, const std::vector<Var>& v) {
      return conv2d(t, v[0], v[1], v[2]);
    }, {random_tensor(rng, {cin, h, w}), random_tensor(rng, {cout, cin, k, k}),
        random_tensor(rng, {cout})}, seed);
  }});
  cases.push_back({"relu", [](Rng& rng, std::uint64_t seed) {
    return gradcheck([](Tape<double>& t, const std::vector<Var>& v) { return relu(t, v[0]); },
                     {away_from_zero(rng, {2, 3, 4})}, seed);
  }});
  cases.push_back({"max_pool2", [](Rng& rng, std::uint64_t seed) {
    const Index h = 2 + static_cast<Index>(rng.index(5)), w = 2 + static_cast<Index>(rng.index(5));
    return gradcheck([](Tape<double>& t, const std::vector<Var>& v) {
      return max_pool2(t, v[0]);
    }, {distinct_values(rng, {2, h, w})}, seed);
  }});
  cases.push_back({"global_avg_pool", [](Rng& rng, std::uint64_t seed) {
    return gradcheck([](Tape<double>& t, const std::vector<Var>& v) {
      return global_avg_pool(t, v[0]);
    }, {random_tensor(rng, {3, 1 + static_cast<Index>(rng.index(5)), 4})}, seed);
  }});
  cases.push_back({"dense", [](Rng& rng, std::uint64_t seed) {
    const Index n = 1 + static_cast<Index>(rng.index(8)), o = 1 + static_cast<Index>(rng.index(5));
    return gradcheck([](Tape<double>& t, const std::vector<Var>& v) {
      return dense(t, v[0], v[1], v[2]);
    }, {random_tensor(rng, {n}), random_tensor(rng, {o, n}), random_tensor(rng, {o})}, seed);
  }});
  cases.push_back({"softmax_cross_entropy", [](Rng& rng, std::uint64_t seed) {
    const Index n = 2 + static_cast<Index>(rng.index(9));
    const Index label = static_cast<Index>(rng.index(static_cast<std::uint64_t>(n)));
    return gradcheck([label](Tape<double>& t, const std::vector<Var>& v) {
      return softmax_cross_entropy(t, v[0], label);
    }, {random_tensor(rng, {n}, -3.0, 3.0)}, seed);
  }});
  cases.push_back({"select", [](Rng& rng, std::uint64_t seed) {
    const Index n = 1 + static_cast<Index>(rng.index(6));
    const Index e = static_cast<Index>(rng.index(static_cast<std::uint64_t>(n)));
    return gradcheck([e](Tape<double>& t, const std::vector<Var>& v) {
      return select(t, v[0], e);
    }, {random_tensor(rng, {n})}, seed);
  }});
  return cases;
}

}  // namespace chromaskew::testing

#endif  // CHROMASKEW_TESTS_GRADCHECK_HPP_
