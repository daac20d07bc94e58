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

#ifndef CHROMASKEW_TENSOR_HPP_
#define CHROMASKEW_TENSOR_HPP_

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chromaskew {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

inline Index shape_size(const Shape& shape) {
  Index n = 1;
  for (Index d : shape) n *= d;
  return n;
}

inline std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

// Dense row-major tensor. The last dimension varies fastest, so a
// [C,H,W] feature map viewed as a C x (H*W) matrix has one channel per row.
template <typename Scalar_>
class Tensor {
 public:
  using Scalar = Scalar_;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowMatrix =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MatrixMap = Eigen::Map<RowMatrix>;
  using ConstMatrixMap = Eigen::Map<const RowMatrix>;

  explicit Tensor(Shape shape)
      : shape_(validated(std::move(shape))),
        data_(Vector::Zero(shape_size(shape_))) {}

  Tensor(Shape shape, Vector data)
      : shape_(validated(std::move(shape))), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_)) {
      throw std::invalid_argument("tensor data length " +
                                  std::to_string(data_.size()) +
                                  " does not match shape " +
                                  shape_string(shape_));
    }
  }

  static Tensor scalar(Scalar value) {
    Tensor t(Shape{1});
    t.data_[0] = value;
    return t;
  }

  static Tensor constant(Shape shape, Scalar value) {
    Tensor t(std::move(shape));
    t.data_.setConstant(value);
    return t;
  }

  const Shape& shape() const noexcept { return shape_; }
  Index rank() const noexcept { return static_cast<Index>(shape_.size()); }
  Index dim(Index axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
  Index size() const noexcept { return data_.size(); }

  Vector& data() noexcept { return data_; }
  const Vector& data() const noexcept { return data_; }

  Scalar& operator[](Index i) { return data_[i]; }
  Scalar operator[](Index i) const { return data_[i]; }

  MatrixMap matrix(Index rows, Index cols) {
    check_view(rows, cols);
    return MatrixMap(data_.data(), rows, cols);
  }
  ConstMatrixMap matrix(Index rows, Index cols) const {
    check_view(rows, cols);
    return ConstMatrixMap(data_.data(), rows, cols);
  }

  Tensor reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

  template <typename Other>
  Tensor<Other> cast() const {
    return Tensor<Other>(shape_, data_.template cast<Other>());
  }

  bool same_shape(const Tensor& other) const noexcept {
    return shape_ == other.shape_;
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  static Shape validated(Shape shape) {
    if (shape.empty()) throw std::invalid_argument("tensor shape is empty");
    for (Index d : shape) {
      if (d < 1) {
        throw std::invalid_argument("tensor dimension < 1 in shape " +
                                    shape_string(shape));
      }
    }
    return shape;
  }

  void check_view(Index rows, Index cols) const {
    if (rows * cols != data_.size()) {
      throw std::invalid_argument("matrix view " + std::to_string(rows) + "x" +
                                  std::to_string(cols) + " of tensor " +
                                  shape_string(shape_));
    }
  }

  Shape shape_;
  Vector data_;
};

// Ordered parameter list exchanged between clients and server.
template <typename Scalar>
using Weights = std::vector<Tensor<Scalar>>;

using ModelWeights = Weights<float>;

template <typename To, typename From>
Weights<To> cast_weights(const Weights<From>& weights) {
  Weights<To> out;
  out.reserve(weights.size());
  for (const auto& t : weights) out.push_back(t.template cast<To>());
  return out;
}

template <typename Scalar>
bool congruent(const Weights<Scalar>& a, const Weights<Scalar>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].same_shape(b[i])) return false;
  }
  return true;
}

template <typename Scalar>
Index parameter_count(const Weights<Scalar>& weights) {
  Index n = 0;
  for (const auto& t : weights) n += t.size();
  return n;
}

// p <- p - lr * g for every parameter.
template <typename Scalar>
Weights<Scalar> sgd_step(const Weights<Scalar>& weights,
                         const Weights<Scalar>& grads, Scalar lr) {
  if (!(lr > Scalar(0))) throw std::invalid_argument("learning rate must be > 0");
  if (!congruent(weights, grads)) {
    throw std::invalid_argument("sgd_step: gradients not congruent with weights");
  }
  Weights<Scalar> out = weights;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].data() -= lr * grads[i].data();
  }
  return out;
}

// Concatenate all parameters into one vector (in list order).
template <typename To, typename Scalar>
Eigen::Matrix<To, Eigen::Dynamic, 1> flatten(const Weights<Scalar>& weights) {
  Eigen::Matrix<To, Eigen::Dynamic, 1> flat(parameter_count(weights));
  Index offset = 0;
  for (const auto& t : weights) {
    flat.segment(offset, t.size()) = t.data().template cast<To>();
    offset += t.size();
  }
  return flat;
}

// Inverse of flatten, using `like` for the shapes.
template <typename Scalar, typename Derived>
Weights<Scalar> unflatten(const Eigen::MatrixBase<Derived>& flat,
                          const Weights<Scalar>& like) {
  if (flat.size() != parameter_count(like)) {
    throw std::invalid_argument("unflatten: length mismatch");
  }
  Weights<Scalar> out;
  out.reserve(like.size());
  Index offset = 0;
  for (const auto& t : like) {
    out.emplace_back(t.shape(),
                     flat.segment(offset, t.size()).template cast<Scalar>());
    offset += t.size();
  }
  return out;
}

}  // namespace chromaskew

#endif  // CHROMASKEW_TENSOR_HPP_
