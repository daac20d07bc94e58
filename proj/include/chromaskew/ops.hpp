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

// Differentiable primitives recorded on a Tape. Feature maps are [C,H,W].

#ifndef CHROMASKEW_OPS_HPP_
#define CHROMASKEW_OPS_HPP_

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chromaskew/tape.hpp"
#include "chromaskew/tensor.hpp"

namespace chromaskew {

namespace detail {

template <typename Scalar>
using RowMatrix = typename Tensor<Scalar>::RowMatrix;

template <typename Scalar>
using VectorMap = Eigen::Map<const typename Tensor<Scalar>::Vector>;

// Unfold a zero-padded [C,H,W] map into (C*k*k) x (H*W) patch columns.
template <typename Scalar>
RowMatrix<Scalar> im2col(const Tensor<Scalar>& x, Index k) {
  const Index channels = x.dim(0), height = x.dim(1), width = x.dim(2);
  const Index pad = k / 2;
  RowMatrix<Scalar> cols(channels * k * k, height * width);
  const Scalar* src = x.data().data();
  for (Index c = 0; c < channels; ++c) {
    for (Index ki = 0; ki < k; ++ki) {
      for (Index kj = 0; kj < k; ++kj) {
        Scalar* row = cols.row((c * k + ki) * k + kj).data();
        for (Index i = 0; i < height; ++i) {
          const Index si = i + ki - pad;
          for (Index j = 0; j < width; ++j) {
            const Index sj = j + kj - pad;
            row[i * width + j] =
                (si >= 0 && si < height && sj >= 0 && sj < width)
                    ? src[(c * height + si) * width + sj]
                    : Scalar(0);
          }
        }
      }
    }
  }
  return cols;
}

template <typename Scalar>
typename Tensor<Scalar>::Vector col2im(const RowMatrix<Scalar>& cols,
                                       Index channels, Index height,
                                       Index width, Index k) {
  const Index pad = k / 2;
  typename Tensor<Scalar>::Vector out =
      Tensor<Scalar>::Vector::Zero(channels * height * width);
  for (Index c = 0; c < channels; ++c) {
    for (Index ki = 0; ki < k; ++ki) {
      for (Index kj = 0; kj < k; ++kj) {
        const Scalar* row = cols.row((c * k + ki) * k + kj).data();
        for (Index i = 0; i < height; ++i) {
          const Index si = i + ki - pad;
          if (si < 0 || si >= height) continue;
          for (Index j = 0; j < width; ++j) {
            const Index sj = j + kj - pad;
            if (sj < 0 || sj >= width) continue;
            out[(c * height + si) * width + sj] += row[i * width + j];
          }
        }
      }
    }
  }
  return out;
}

}  // namespace detail

// Stride-1 convolution with "same" zero padding. x:[Cin,H,W],
// w:[Cout,Cin,k,k] (k odd), b:[Cout] -> [Cout,H,W].
template <typename Scalar>
Var conv2d(Tape<Scalar>& tape, Var x, Var w, Var b) {
  const auto& xv = tape.value(x);
  const auto& wv = tape.value(w);
  const auto& bv = tape.value(b);
  if (xv.rank() != 3 || wv.rank() != 4 || bv.rank() != 1) {
    throw std::invalid_argument("conv2d: expected x[C,H,W], w[O,C,k,k], b[O]; got " +
                                shape_string(xv.shape()) + " " +
                                shape_string(wv.shape()) + " " +
                                shape_string(bv.shape()));
  }
  const Index cin = xv.dim(0), height = xv.dim(1), width = xv.dim(2);
  const Index cout = wv.dim(0), k = wv.dim(2);
  if (wv.dim(1) != cin || wv.dim(3) != k || k % 2 == 0 || bv.dim(0) != cout) {
    throw std::invalid_argument("conv2d: incompatible shapes x" +
                                shape_string(xv.shape()) + " w" +
                                shape_string(wv.shape()) + " b" +
                                shape_string(bv.shape()));
  }

  detail::RowMatrix<Scalar> cols = detail::im2col(xv, k);
  const auto wm = wv.matrix(cout, cin * k * k);
  Tensor<Scalar> out(Shape{cout, height, width});
  auto om = out.matrix(cout, height * width);
  om.noalias() = wm * cols;
  om.colwise() += bv.data();

  const Index xi = x.index, wi = w.index, bi = b.index;
  return tape.record(
      std::move(out), {xi, wi, bi},
      [xi, wi, bi, cin, cout, height, width, k, cols = std::move(cols)](
          Tape<Scalar>& t, const typename Tape<Scalar>::Vector& g) {
        const Eigen::Map<const detail::RowMatrix<Scalar>> gm(g.data(), cout,
                                                             height * width);
        if (t.wants_grad(wi)) {
          detail::RowMatrix<Scalar> gw(cout, cin * k * k);
          gw.noalias() = gm * cols.transpose();
          t.accumulate(wi, detail::VectorMap<Scalar>(gw.data(), gw.size()));
        }
        if (t.wants_grad(bi)) {
          t.accumulate(bi, gm.rowwise().sum());
        }
        if (t.wants_grad(xi)) {
          const auto wm = t.value_at(wi).matrix(cout, cin * k * k);
          detail::RowMatrix<Scalar> gcols(cin * k * k, height * width);
          gcols.noalias() = wm.transpose() * gm;
          t.accumulate(xi, detail::col2im<Scalar>(gcols, cin, height, width, k));
        }
      });
}

// Elementwise max(x, 0); the subgradient at 0 is 0.
template <typename Scalar>
Var relu(Tape<Scalar>& tape, Var x) {
  const auto& xv = tape.value(x);
  Tensor<Scalar> out(xv.shape(), xv.data().cwiseMax(Scalar(0)));
  const Index xi = x.index;
  return tape.record(std::move(out), {xi},
                     [xi](Tape<Scalar>& t, const typename Tape<Scalar>::Vector& g) {
                       if (!t.wants_grad(xi)) return;
                       const auto& in = t.value_at(xi).data();
                       t.accumulate(xi, (in.array() > Scalar(0))
                                            .select(g, Scalar(0))
                                            .matrix());
                     });
}

// 2x2 max pool, stride 2, [C,H,W] -> [C,H/2,W/2]. Gradient goes to the first
// maximal element of each window in row-major order.
template <typename Scalar>
Var max_pool2(Tape<Scalar>& tape, Var x) {
  const auto& xv = tape.value(x);
  if (xv.rank() != 3 || xv.dim(1) < 2 || xv.dim(2) < 2) {
    throw std::invalid_argument("max_pool2: expected [C,H,W] with H,W >= 2, got " +
                                shape_string(xv.shape()));
  }
  const Index channels = xv.dim(0), height = xv.dim(1), width = xv.dim(2);
  const Index oh = height / 2, ow = width / 2;
  Tensor<Scalar> out(Shape{channels, oh, ow});
  std::vector<Index> argmax(static_cast<std::size_t>(channels * oh * ow));
  const Scalar* src = xv.data().data();
  for (Index c = 0; c < channels; ++c) {
    for (Index i = 0; i < oh; ++i) {
      for (Index j = 0; j < ow; ++j) {
        Index best = (c * height + 2 * i) * width + 2 * j;
        for (Index di = 0; di < 2; ++di) {
          for (Index dj = 0; dj < 2; ++dj) {
            const Index idx = (c * height + 2 * i + di) * width + 2 * j + dj;
            if (src[idx] > src[best]) best = idx;
          }
        }
        const Index o = (c * oh + i) * ow + j;
        out[o] = src[best];
        argmax[static_cast<std::size_t>(o)] = best;
      }
    }
  }
  const Index xi = x.index;
  const Index in_size = xv.size();
  return tape.record(
      std::move(out), {xi},
      [xi, in_size, argmax = std::move(argmax)](
          Tape<Scalar>& t, const typename Tape<Scalar>::Vector& g) {
        if (!t.wants_grad(xi)) return;
        typename Tape<Scalar>::Vector gx = Tape<Scalar>::Vector::Zero(in_size);
        for (std::size_t o = 0; o < argmax.size(); ++o) {
          gx[argmax[o]] += g[static_cast<Index>(o)];
        }
        t.accumulate(xi, gx);
      });
}

// [C,H,W] -> [C], spatial mean per channel.
template <typename Scalar>
Var global_avg_pool(Tape<Scalar>& tape, Var x) {
  const auto& xv = tape.value(x);
  if (xv.rank() != 3) {
    throw std::invalid_argument("global_avg_pool: expected [C,H,W], got " +
                                shape_string(xv.shape()));
  }
  const Index channels = xv.dim(0), area = xv.dim(1) * xv.dim(2);
  const auto xm = xv.matrix(channels, area);
  Tensor<Scalar> out(Shape{channels});
  for (Index c = 0; c < channels; ++c) {
    out[c] = static_cast<Scalar>(xm.row(c).template cast<double>().sum() /
                                 static_cast<double>(area));
  }
  const Index xi = x.index;
  return tape.record(
      std::move(out), {xi},
      [xi, channels, area](Tape<Scalar>& t, const typename Tape<Scalar>::Vector& g) {
        if (!t.wants_grad(xi)) return;
        detail::RowMatrix<Scalar> gx =
            (g / static_cast<Scalar>(area)).replicate(1, area);
        t.accumulate(xi, detail::VectorMap<Scalar>(gx.data(), gx.size()));
      });
}

// Fully connected layer on the flattened input. w:[O,N], b:[O] -> [O].
template <typename Scalar>
Var dense(Tape<Scalar>& tape, Var x, Var w, Var b) {
  const auto& xv = tape.value(x);
  const auto& wv = tape.value(w);
  const auto& bv = tape.value(b);
  if (wv.rank() != 2 || bv.rank() != 1 || wv.dim(1) != xv.size() ||
      bv.dim(0) != wv.dim(0)) {
    throw std::invalid_argument("dense: incompatible shapes x" +
                                shape_string(xv.shape()) + " w" +
                                shape_string(wv.shape()) + " b" +
                                shape_string(bv.shape()));
  }
  const Index outputs = wv.dim(0), inputs = wv.dim(1);
  Tensor<Scalar> out(Shape{outputs});
  out.data().noalias() = wv.matrix(outputs, inputs) * xv.data();
  out.data() += bv.data();
  const Index xi = x.index, wi = w.index, bi = b.index;
  return tape.record(
      std::move(out), {xi, wi, bi},
      [xi, wi, bi, outputs, inputs](Tape<Scalar>& t,
                                    const typename Tape<Scalar>::Vector& g) {
        if (t.wants_grad(wi)) {
          detail::RowMatrix<Scalar> gw = g * t.value_at(xi).data().transpose();
          t.accumulate(wi, detail::VectorMap<Scalar>(gw.data(), gw.size()));
        }
        if (t.wants_grad(bi)) t.accumulate(bi, g);
        if (t.wants_grad(xi)) {
          t.accumulate(xi, t.value_at(wi).matrix(outputs, inputs).transpose() * g);
        }
      });
}

// Per-sample loss logsumexp(z) - z[label].
template <typename Scalar>
Var softmax_cross_entropy(Tape<Scalar>& tape, Var logits, Index label) {
  const auto& z = tape.value(logits).data();
  if (label < 0 || label >= z.size()) {
    throw std::invalid_argument("softmax_cross_entropy: label " +
                                std::to_string(label) + " out of range");
  }
  const double zmax = static_cast<double>(z.maxCoeff());
  double denom = 0.0;
  for (Index i = 0; i < z.size(); ++i) {
    denom += std::exp(static_cast<double>(z[i]) - zmax);
  }
  const double lse = zmax + std::log(denom);
  const Index zi = logits.index;
  return tape.record(
      Tensor<Scalar>::scalar(static_cast<Scalar>(lse - static_cast<double>(z[label]))),
      {zi}, [zi, label, lse](Tape<Scalar>& t, const typename Tape<Scalar>::Vector& g) {
        if (!t.wants_grad(zi)) return;
        const auto& zz = t.value_at(zi).data();
        typename Tape<Scalar>::Vector gz(zz.size());
        for (Index i = 0; i < zz.size(); ++i) {
          gz[i] = static_cast<Scalar>(std::exp(static_cast<double>(zz[i]) - lse));
        }
        gz[label] -= Scalar(1);
        t.accumulate(zi, gz * g[0]);
      });
}

// Picks one element of x as a scalar (e.g. the class score y^c).
template <typename Scalar>
Var select(Tape<Scalar>& tape, Var x, Index element) {
  const auto& xv = tape.value(x);
  if (element < 0 || element >= xv.size()) {
    throw std::invalid_argument("select: element " + std::to_string(element) +
                                " out of range for " + shape_string(xv.shape()));
  }
  const Index xi = x.index, n = xv.size();
  return tape.record(Tensor<Scalar>::scalar(xv[element]), {xi},
                     [xi, n, element](Tape<Scalar>& t,
                                      const typename Tape<Scalar>::Vector& g) {
                       if (!t.wants_grad(xi)) return;
                       typename Tape<Scalar>::Vector gx =
                           Tape<Scalar>::Vector::Zero(n);
                       gx[element] = g[0];
                       t.accumulate(xi, gx);
                     });
}

}  // namespace chromaskew

#endif  // CHROMASKEW_OPS_HPP_
