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

#ifndef CHROMASKEW_TAPE_HPP_
#define CHROMASKEW_TAPE_HPP_

#include <atomic>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chromaskew/tensor.hpp"

namespace chromaskew {

// Handle to a tensor recorded on a Tape. Carries the owning tape's id so a
// handle from a different tape is rejected instead of silently aliasing.
struct Var {
  std::uint64_t tape = 0;
  Index index = -1;
};

namespace detail {
inline std::uint64_t next_tape_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}
}  // namespace detail

// Reverse-mode tape. Every recorded tensor owns one gradient slot; gradients
// are replayed strictly in reverse recording order. A tape is not
// thread-safe and is meant to live on one thread.
template <typename Scalar>
class Tape {
 public:
  using TensorT = Tensor<Scalar>;
  using Vector = typename TensorT::Vector;
  // Called with the adjoint of the node's output. Implementations push
  // adjoints into their inputs through accumulate(), skipping inputs for which
  // wants_grad() is false.
  using Backward = std::function<void(Tape&, const Vector& grad_out)>;

  Tape() : id_(detail::next_tape_id()) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;

  std::uint64_t id() const noexcept { return id_; }
  Index size() const noexcept { return static_cast<Index>(nodes_.size()); }

  Var leaf(TensorT value) { return record(std::move(value), {}, nullptr); }

  Var record(TensorT value, std::vector<Index> inputs, Backward backward) {
    for (Index i : inputs) {
      if (i < 0 || i >= size()) throw std::logic_error("tape: dangling input");
    }
    nodes_.push_back(Node{std::move(value), std::move(inputs), std::move(backward)});
    return Var{id_, size() - 1};
  }

  bool owns(Var v) const noexcept {
    return v.tape == id_ && v.index >= 0 && v.index < size();
  }

  Index index_of(Var v) const {
    if (!owns(v)) throw std::invalid_argument("tensor is not recorded on this tape");
    return v.index;
  }

  const TensorT& value(Var v) const { return nodes_[index_of(v)].value; }
  const TensorT& value_at(Index i) const { return nodes_[i].value; }

  // d(output)/d(target). `output` must hold a single scalar.
  TensorT grad_wrt(Var output, Var target) {
    const Var targets[] = {target};
    return std::move(gradients(output, targets).front());
  }

  std::vector<TensorT> gradients(Var output, std::span<const Var> targets) {
    const Index out = index_of(output);
    if (nodes_[out].value.size() != 1) {
      throw std::invalid_argument("gradient output must be a scalar, got shape " +
                                  shape_string(nodes_[out].value.shape()));
    }
    Index lowest = out;
    wanted_.assign(nodes_.size(), 0);
    for (Var t : targets) {
      const Index i = index_of(t);
      wanted_[i] = 1;
      lowest = std::min(lowest, i);
    }
    // A node needs an adjoint iff it depends on some target.
    for (Index i = lowest; i <= out; ++i) {
      if (wanted_[i]) continue;
      for (Index in : nodes_[i].inputs) {
        if (wanted_[in]) {
          wanted_[i] = 1;
          break;
        }
      }
    }

    grads_.assign(nodes_.size(), Vector());
    grads_[out] = Vector::Ones(1);
    for (Index i = out; i >= lowest; --i) {
      if (!wanted_[i] || grads_[i].size() == 0 || !nodes_[i].backward) continue;
      nodes_[i].backward(*this, grads_[i]);
    }

    std::vector<TensorT> result;
    result.reserve(targets.size());
    for (Var t : targets) {
      const TensorT& v = nodes_[t.index].value;
      if (grads_[t.index].size() == 0) {
        result.emplace_back(v.shape());
      } else {
        result.emplace_back(v.shape(), grads_[t.index]);
      }
    }
    grads_.clear();
    return result;
  }

  // For primitive implementations.
  bool wants_grad(Index node) const { return wanted_[node] != 0; }

  template <typename Derived>
  void accumulate(Index node, const Eigen::MatrixBase<Derived>& delta) {
    Vector& g = grads_[node];
    if (g.size() == 0) {
      g = delta;
    } else {
      g += delta;
    }
  }

 private:
  struct Node {
    TensorT value;
    std::vector<Index> inputs;
    Backward backward;
  };

  std::uint64_t id_;
  std::vector<Node> nodes_;
  std::vector<Vector> grads_;
  std::vector<char> wanted_;
};

}  // namespace chromaskew

#endif  // CHROMASKEW_TAPE_HPP_
